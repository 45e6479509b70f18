#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "subprompt/srt.hpp"

using namespace subprompt;

TEST_CASE("canonical single cue") {
  auto cues = parse_srt("1\n00:00:01,000 --> 00:00:02,500\nhallo wereld\n\n");
  REQUIRE(cues.size() == 1);
  CHECK(cues[0].index == 1);
  CHECK(cues[0].start_ms == 1000);
  CHECK(cues[0].end_ms == 2500);
  CHECK(cues[0].text == "hallo wereld");
}

TEST_CASE("empty input") { CHECK(parse_srt("").empty()); }

TEST_CASE("multi-line cue text joins with single spaces") {
  auto cues = parse_srt("1\n00:00:00,000 --> 00:00:01,000\nregel een\nregel twee\n\n");
  REQUIRE(cues.size() == 1);
  CHECK(cues[0].text == "regel een regel twee");
}

TEST_CASE("html-style tags are stripped") {
  auto cues = parse_srt("1\n00:00:00,000 --> 00:00:01,000\n<i>hallo</i> <b>daar</b>\n\n");
  CHECK(cues[0].text == "hallo daar");
}

TEST_CASE("malformed timing line names the line number") {
  try {
    parse_srt("1\nniet een tijd\nhallo\n\n");
    FAIL("expected parse error");
  } catch (const SrtParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("out-of-order cues rejected") {
  std::string srt =
      "1\n00:00:05,000 --> 00:00:06,000\na\n\n"
      "2\n00:00:01,000 --> 00:00:02,000\nb\n\n";
  CHECK_THROWS_AS(parse_srt(srt), SrtParseError);
}

TEST_CASE("overlapping but ordered cues accepted") {
  std::string srt =
      "1\n00:00:01,000 --> 00:00:04,000\na\n\n"
      "2\n00:00:02,000 --> 00:00:05,000\nb\n\n";
  CHECK(parse_srt(srt).size() == 2);
}

TEST_CASE("crlf input") {
  auto cues = parse_srt("1\r\n00:00:01,000 --> 00:00:02,000\r\nhallo\r\n\r\n");
  REQUIRE(cues.size() == 1);
  CHECK(cues[0].text == "hallo");
}

TEST_CASE("render format fixture") {
  CHECK(render_srt({}) == "");
  SubtitleCue c{1, 0, 30000, "x"};
  CHECK(render_srt({c}) == "1\n00:00:00,000 --> 00:00:30,000\nx\n\n");
}

TEST_CASE("parse/render round trips on random valid cue lists") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SubtitleCue> cues;
    std::int64_t t = 0;
    int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      SubtitleCue c;
      c.index = i + 1;
      c.start_ms = t + static_cast<std::int64_t>(rng() % 2000);
      c.end_ms = c.start_ms + 1 + static_cast<std::int64_t>(rng() % 5000);
      c.text = "woord" + std::to_string(rng() % 100) + " nog" + std::to_string(rng() % 10);
      t = c.start_ms;
      cues.push_back(c);
    }
    std::string rendered = render_srt(cues);
    CHECK(parse_srt(rendered) == cues);
    CHECK(render_srt(parse_srt(rendered)) == rendered);  // byte identity on canonical files
  }
}

TEST_CASE("cues_in_window") {
  std::vector<SubtitleCue> cues{{1, 1000, 2500, "eerste"}, {2, 3000, 4000, "tweede"}};
  CHECK(cues_in_window(cues, 0, 5000) == "eerste tweede");
  CHECK(cues_in_window(cues, 0, 500) == "");
  CHECK(cues_in_window(cues, 0, 1500) == "eerste");
  CHECK(cues_in_window(cues, 2400, 3100) == "eerste tweede");
}

TEST_CASE("window result invariant under splitting a cue") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    SubtitleCue c{1, 1000, 5000, "links rechts"};
    std::int64_t mid = 1001 + static_cast<std::int64_t>(rng() % 3998);
    std::vector<SubtitleCue> split{{1, c.start_ms, mid, "links"}, {2, mid, c.end_ms, "rechts"}};
    // window endpoints outside the cue interior, so the window either covers
    // the whole original span or misses it entirely
    std::int64_t a = static_cast<std::int64_t>(rng() % 1000);
    // either entirely before the cue (b <= start) or covering it (b >= end)
    std::int64_t b = (rng() % 2) ? a + 1 + static_cast<std::int64_t>(rng() % (1000 - a))
                                 : 5000 + static_cast<std::int64_t>(rng() % 3000);
    CHECK(cues_in_window({c}, a, b) == cues_in_window(split, a, b));
  }
}
