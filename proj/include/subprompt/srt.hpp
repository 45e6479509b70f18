#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace subprompt {

struct SubtitleCue {
  int index = 0;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::string text;  // multi-line cue text joined with single spaces

  bool operator==(const SubtitleCue&) const = default;
};

struct SrtParseError : std::runtime_error {
  int line = 0;
  SrtParseError(int line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

// Parses SubRip text. HTML-style tags in cue text are stripped; cue-internal
// newlines collapse to a single space. Throws SrtParseError on malformed
// timing lines and on out-of-order cues.
std::vector<SubtitleCue> parse_srt(const std::string& text);

// Canonical rendering: "index\nHH:MM:SS,mmm --> HH:MM:SS,mmm\ntext\n\n" per cue.
// parse_srt(render_srt(cues)) == cues for any valid cue list.
std::string render_srt(const std::vector<SubtitleCue>& cues);

// Space-joined text of every cue overlapping [start_ms, end_ms), in start order.
std::string cues_in_window(const std::vector<SubtitleCue>& cues, std::int64_t start_ms,
                           std::int64_t end_ms);

}  // namespace subprompt
