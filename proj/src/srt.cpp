#include "subprompt/srt.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

namespace subprompt {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  return lines;
}

bool is_blank(const std::string& s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string strip_tags(const std::string& s) {
  std::string out;
  bool in_tag = false;
  for (char c : s) {
    if (c == '<') {
      in_tag = true;
    } else if (c == '>' && in_tag) {
      in_tag = false;
    } else if (!in_tag) {
      out.push_back(c);
    }
  }
  return out;
}

std::string collapse_spaces(const std::string& s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

// "HH:MM:SS,mmm" -> ms, or -1
std::int64_t parse_timestamp(const std::string& s) {
  int h, m, sec, ms;
  char c1, c2, c3;
  std::istringstream iss(s);
  if (!(iss >> h >> c1 >> m >> c2 >> sec >> c3 >> ms)) return -1;
  if (c1 != ':' || c2 != ':' || (c3 != ',' && c3 != '.')) return -1;
  if (h < 0 || m < 0 || m > 59 || sec < 0 || sec > 59 || ms < 0 || ms > 999) return -1;
  return ((static_cast<std::int64_t>(h) * 60 + m) * 60 + sec) * 1000 + ms;
}

bool parse_timing_line(const std::string& line, std::int64_t& start, std::int64_t& end) {
  auto arrow = line.find("-->");
  if (arrow == std::string::npos) return false;
  start = parse_timestamp(line.substr(0, arrow));
  end = parse_timestamp(line.substr(arrow + 3));
  return start >= 0 && end >= 0;
}

std::string format_timestamp(std::int64_t ms) {
  char buf[16];
  std::int64_t h = ms / 3600000;
  int m = static_cast<int>(ms / 60000 % 60);
  int s = static_cast<int>(ms / 1000 % 60);
  int f = static_cast<int>(ms % 1000);
  std::snprintf(buf, sizeof(buf), "%02lld:%02d:%02d,%03d", static_cast<long long>(h), m, s, f);
  return buf;
}

}  // namespace

std::vector<SubtitleCue> parse_srt(const std::string& text) {
  std::string body = text;
  if (body.size() >= 3 && body.compare(0, 3, "\xEF\xBB\xBF") == 0) body.erase(0, 3);

  auto lines = split_lines(body);
  std::vector<SubtitleCue> cues;
  std::size_t i = 0;
  while (i < lines.size()) {
    if (is_blank(lines[i])) {
      ++i;
      continue;
    }
    SubtitleCue cue;
    // index line
    try {
      std::size_t pos = 0;
      cue.index = std::stoi(lines[i], &pos);
      if (pos != lines[i].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw SrtParseError(static_cast<int>(i + 1), "expected cue index, got \"" + lines[i] + "\"");
    }
    ++i;
    // timing line
    if (i >= lines.size() || !parse_timing_line(lines[i], cue.start_ms, cue.end_ms))
      throw SrtParseError(static_cast<int>(i + 1), "malformed timing line");
    if (cue.end_ms <= cue.start_ms)
      throw SrtParseError(static_cast<int>(i + 1), "cue end does not follow start");
    ++i;
    // text lines until blank/EOF
    std::vector<std::string> text_lines;
    while (i < lines.size() && !is_blank(lines[i])) {
      text_lines.push_back(lines[i]);
      ++i;
    }
    if (text_lines.empty())
      throw SrtParseError(static_cast<int>(i), "cue " + std::to_string(cue.index) + " has no text");
    std::string joined;
    for (std::size_t k = 0; k < text_lines.size(); ++k) {
      if (k) joined.push_back(' ');
      joined += text_lines[k];
    }
    cue.text = collapse_spaces(strip_tags(joined));
    if (cue.text.empty())
      throw SrtParseError(static_cast<int>(i), "cue " + std::to_string(cue.index) + " has empty text");

    if (!cues.empty()) {
      if (cue.start_ms < cues.back().start_ms)
        throw SrtParseError(static_cast<int>(i), "cues out of order by start time");
      if (cue.index <= cues.back().index)
        throw SrtParseError(static_cast<int>(i), "cue indices not strictly increasing");
    }
    cues.push_back(std::move(cue));
  }
  return cues;
}

std::string render_srt(const std::vector<SubtitleCue>& cues) {
  std::string out;
  const SubtitleCue* prev = nullptr;
  for (const auto& c : cues) {
    if (c.end_ms <= c.start_ms) throw std::invalid_argument("render_srt: end_ms <= start_ms");
    if (c.text.empty()) throw std::invalid_argument("render_srt: empty cue text");
    if (prev && (c.start_ms < prev->start_ms || c.index <= prev->index))
      throw std::invalid_argument("render_srt: cues out of order");
    out += std::to_string(c.index);
    out.push_back('\n');
    out += format_timestamp(c.start_ms) + " --> " + format_timestamp(c.end_ms);
    out.push_back('\n');
    out += c.text;
    out += "\n\n";
    prev = &c;
  }
  return out;
}

std::string cues_in_window(const std::vector<SubtitleCue>& cues, std::int64_t start_ms,
                           std::int64_t end_ms) {
  std::string out;
  for (const auto& c : cues) {
    if (c.start_ms < end_ms && c.end_ms > start_ms) {
      if (!out.empty()) out.push_back(' ');
      out += c.text;
    }
  }
  return out;
}

}  // namespace subprompt
