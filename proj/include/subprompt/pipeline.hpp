#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subprompt/manifest.hpp"
#include "subprompt/model.hpp"
#include "subprompt/synth.hpp"
#include "subprompt/wer.hpp"

namespace subprompt {

struct FilterConfig {
  int max_tokens = 100;
  double max_rep_ratio = 0.5;
};

// Pseudo-label state after iteration t. Training reads only subtitle and
// pseudo_transcript from the manifest; references ride along for evaluation.
struct IterationState {
  int t = 0;
  std::vector<Utterance> manifest;
  std::string checkpoint_path;
  std::optional<EvalReport> metrics;
};

// Replaces pseudo transcripts with base-model greedy output (no prompt,
// strategy none) and applies the hallucination filter; dropped utterances are
// removed. When base is null the corruption-channel pseudo labels already in
// the manifest are kept and only the filter runs.
std::vector<Utterance> bootstrap_pseudo_labels(const Model* base, const Vocab& vocab,
                                               const std::vector<Utterance>& manifest,
                                               const FilterConfig& filter = {});

struct IterationConfig {
  OptimConfig optim;
  WaConfig wa;              // strategy/layers for pseudo-label regeneration
  FilterConfig filter;
  bool use_prompt = true;   // subtitle prompt during training and decoding
  // Fraction of training examples whose prompt is blanked, so the model
  // cannot lean on subtitle copying alone.
  double prompt_dropout = 0.5;
  // Learning-rate multiplier applied once per completed refinement round, so
  // later rounds fine-tune gently instead of drifting on their own labels.
  double refine_lr_decay = 0.3;
  int rare_threshold = 10;
};

// (features, decoder input) pairs for fine-tuning. With use_prompt, each
// example's subtitle is blanked with probability prompt_dropout
// (deterministic in seed).
std::vector<TrainExample> build_train_examples(const std::vector<Utterance>& manifest,
                                               const Vocab& vocab, bool use_prompt,
                                               double prompt_dropout, std::uint64_t seed);

struct IterationResult {
  IterationState state;
  TrainLog train_log;
  int filter_retained_previous = 0;  // decodes rejected by the filter
};

// One refinement cycle: fine-tune on (subtitle, Y_pt_{t-1}), regenerate
// pseudo labels for the whole training manifest, evaluate on held-out,
// persist iter<t>/{checkpoint, manifest.jsonl, metrics.json} under out_dir.
// A decode that fails the hallucination filter keeps the previous pseudo
// transcript so the manifest row set is stable across iterations.
IterationResult run_iteration(const IterationState& prev, Model model,
                              const std::vector<Utterance>& heldout, const Vocab& vocab,
                              const std::map<std::string, long>& train_freqs,
                              const IterationConfig& cfg, const std::string& out_dir);

// Decode + pooled evaluation of a manifest against its references.
EvalReport evaluate_manifest(const Model& model, const std::vector<Utterance>& utts,
                             const Vocab& vocab, bool use_prompt, const WaConfig& wa,
                             const std::map<std::string, long>& train_freqs, int rare_threshold);

struct ExperimentConfig {
  SynthConfig synth;
  ModelConfig model;
  OptimConfig optim;
  FilterConfig filter;
  int iterations = 3;
  std::vector<WaStrategy> wa_strategies{WaStrategy::none, WaStrategy::gini};
  double prompt_dropout = 0.5;
  double refine_lr_decay = 0.3;
  bool cold_start = false;  // restart from init params each iteration
  int rare_threshold = 10;
  std::string out_dir = "out";
};

struct ExperimentCell {
  std::string name;  // e.g. "sp" / "np"
  bool use_prompt = true;
  std::vector<double> pseudo_label_wer;                    // per iteration, train set
  std::map<std::string, std::vector<EvalReport>> heldout;  // wa strategy -> per-iteration report
  std::string error;                                       // non-empty when the cell failed
};

struct ExperimentReport {
  double bootstrap_pseudo_wer = 0.0;  // Y_pt_0 vs references, train set
  std::vector<ExperimentCell> cells;

  std::string to_json() const;
  std::string table() const;
};

// Full grid {no-prompt, subtitle-prompt} x wa strategies x iterations on a
// synthetic corpus. Each cell is seeded and persisted under out_dir/<cell>/;
// a cell whose final report already exists on disk is not re-run.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Key-value config file ("key = value" lines, '#' comments) overlaying the
// defaults of every Synth/Model/Optim/experiment field.
ExperimentConfig load_experiment_config(const std::string& path, const ExperimentConfig& base = {});
ExperimentConfig apply_config_overrides(const std::map<std::string, std::string>& kv,
                                        ExperimentConfig base);

}  // namespace subprompt
