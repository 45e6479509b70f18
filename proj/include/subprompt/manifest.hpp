#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subprompt/mat.hpp"

namespace subprompt {

// One segment of audio-with-weak-labels. `reference` is the verbatim
// transcript, carried for evaluation only; training code never receives it
// (training consumes (features, DecoderInput) pairs built from subtitle and
// pseudo_transcript).
struct Utterance {
  std::string id;
  std::string subtitle;
  std::string pseudo_transcript;
  std::optional<std::string> reference;
  std::int64_t duration_ms = 0;
  std::string feature_file;  // relative to the manifest's directory unless absolute
  Mat features;              // N x d_feat
};

// Feature sidecar: "SBRF", u32le N, u32le d_feat, N*d_feat float32le row-major.
void write_features(const std::string& path, const Mat& features);
Mat read_features(const std::string& path);

// Manifest: JSON Lines, one utterance object per line. Feature matrices live
// in sidecar files next to the manifest; load resolves relative paths and
// validates the sidecars (magic, size, NaN scan).
std::vector<Utterance> load_manifest(const std::string& path);
void write_manifest(const std::vector<Utterance>& utts, const std::string& path);

// Atomic text file write (write temp, then rename).
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace subprompt
