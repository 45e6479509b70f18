#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "subprompt/manifest.hpp"

namespace fs = std::filesystem;
using namespace subprompt;

namespace {

fs::path temp_dir(const char* name) {
  fs::path p = fs::temp_directory_path() / "subprompt_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// float32-representable values round trip through the sidecar bit-exactly
Mat sample_features(std::size_t n, std::size_t d, unsigned seed) {
  Mat m(n, d);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.v[i] = static_cast<float>(std::sin(static_cast<double>(seed + i)));
  return m;
}

}  // namespace

TEST_CASE("empty manifest loads as empty") {
  auto dir = temp_dir("empty");
  std::ofstream((dir / "m.jsonl").string()).close();
  CHECK(load_manifest((dir / "m.jsonl").string()).empty());
}

TEST_CASE("write-then-load of a 3-utterance set is identity") {
  auto dir = temp_dir("roundtrip");
  std::vector<Utterance> utts;
  for (int i = 0; i < 3; ++i) {
    Utterance u;
    u.id = "utt-" + std::to_string(i);
    u.subtitle = "ondertitel " + std::to_string(i);
    u.pseudo_transcript = "pseudo " + std::to_string(i);
    if (i != 1) u.reference = "referentie " + std::to_string(i);
    u.duration_ms = 1000 * (i + 1);
    u.features = sample_features(4 + static_cast<std::size_t>(i), 3, static_cast<unsigned>(i));
    utts.push_back(std::move(u));
  }
  std::string path = (dir / "m.jsonl").string();
  write_manifest(utts, path);
  auto loaded = load_manifest(path);
  REQUIRE(loaded.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(loaded[i].id == utts[i].id);
    CHECK(loaded[i].subtitle == utts[i].subtitle);
    CHECK(loaded[i].pseudo_transcript == utts[i].pseudo_transcript);
    CHECK(loaded[i].reference == utts[i].reference);
    CHECK(loaded[i].duration_ms == utts[i].duration_ms);
    REQUIRE(loaded[i].features.rows == utts[i].features.rows);
    CHECK(loaded[i].features.v == utts[i].features.v);  // bit-exact
  }
  // second write produces byte-identical manifest
  std::string first = read_file(path);
  write_manifest(loaded, path);
  CHECK(read_file(path) == first);
}

TEST_CASE("truncated feature file error names the utterance id") {
  auto dir = temp_dir("truncated");
  Utterance u;
  u.id = "kapot";
  u.duration_ms = 500;
  u.features = sample_features(10, 2, 1);
  std::string path = (dir / "m.jsonl").string();
  write_manifest({u}, path);
  // drop the last row of floats: declared N=10 but only 9 rows present
  auto fpath = dir / "kapot.sbrf";
  auto size = fs::file_size(fpath);
  fs::resize_file(fpath, size - 2 * 4);
  try {
    load_manifest(path);
    FAIL("expected load error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("kapot") != std::string::npos);
  }
}

TEST_CASE("missing feature file names the id") {
  auto dir = temp_dir("missing");
  Utterance u;
  u.id = "weg";
  u.duration_ms = 500;
  u.features = sample_features(2, 2, 2);
  std::string path = (dir / "m.jsonl").string();
  write_manifest({u}, path);
  fs::remove(dir / "weg.sbrf");
  CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("weg"), std::runtime_error);
}

TEST_CASE("NaN in features rejected") {
  auto dir = temp_dir("nan");
  Utterance u;
  u.id = "nanutt";
  u.duration_ms = 500;
  u.features = sample_features(2, 2, 3);
  u.features.v[1] = std::nan("");
  std::string path = (dir / "m.jsonl").string();
  write_manifest({u}, path);
  CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("nanutt"), std::runtime_error);
}
