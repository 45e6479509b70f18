#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subprompt/manifest.hpp"
#include "subprompt/vocab.hpp"

namespace subprompt {

// Synthetic stand-in for subtitled broadcast data: a Zipf lexicon of word
// types, per-word feature frames with noise, and independent corruption
// channels for subtitles and pseudo transcripts.
struct SynthConfig {
  int n_word_types = 200;
  double zipf_s = 1.0;
  int n_train = 400;
  int n_heldout = 120;
  int words_per_utt_min = 3;
  int words_per_utt_max = 12;
  int frames_per_word_min = 2;
  int frames_per_word_max = 6;
  int d_feat = 16;
  double feature_noise_sigma = 0.3;
  // subtitle corruption
  double p_drop = 0.25;
  double p_sub = 0.08;
  double p_ins = 0.10;
  double rare_keep_boost = 1.0;  // survival probability floor for rare words
  int rare_rank_min = 50;        // Zipf ranks >= this count as rare at generation time
  // When > 0, consecutive rare types share a feature vector up to this jitter,
  // making them near-homophones the audio alone cannot reliably resolve.
  double rare_pair_spread = 0.0;
  // pseudo-transcript corruption
  double p_pseudo_sub = 0.10;
  double p_pseudo_sub_rare = 0.10;  // substitution rate for rare words (weak recognizers miss these most)
  double p_pseudo_del = 0.06;
  double p_pseudo_ins = 0.03;
  double p_lead_del = 0.12;  // whole-prefix deletion rate
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthDataset {
  std::vector<Utterance> train;
  std::vector<Utterance> heldout;
  std::vector<std::string> train_corpus;  // training-target text, one line per utterance
  Vocab vocab;                            // full generator lexicon
};

SynthDataset synth_dataset(const SynthConfig& cfg);

}  // namespace subprompt
