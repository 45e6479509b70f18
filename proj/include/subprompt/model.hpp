#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "subprompt/attention.hpp"
#include "subprompt/autograd.hpp"
#include "subprompt/decoder_input.hpp"
#include "subprompt/mat.hpp"

namespace subprompt {

struct ModelConfig {
  int d_model = 64;
  int n_heads = 4;
  int n_enc_layers = 2;
  int n_dec_layers = 2;
  int d_feat = 16;
  int d_ff = 0;  // 0 means 4 * d_model
  int max_seq = 256;
  int vocab_size = 0;
  std::uint64_t seed = 0;
  bool scale_keys = true;  // scale prompt keys as well as values during WA

  int ff_dim() const { return d_ff > 0 ? d_ff : 4 * d_model; }
  void validate() const;
};

// Named tensors; iteration order (std::map) is the deterministic parameter
// order used by init, Adam and checkpoints.
struct ModelParams {
  std::map<std::string, Mat> t;
};

ModelParams init_params(const ModelConfig& cfg);

// Inference-time weighting of the prompt segment of decoder self-attention
// keys/values (strategy weights already resolved to plain factors).
struct WaApply {
  std::vector<double> g;  // length prompt_len
  std::size_t prompt_begin = 0;
  std::size_t prompt_len = 0;
  std::vector<int> layers;  // decoder self-attention layer indices
  bool scale_keys = true;

  bool applies_to(int layer) const;
};

struct ForwardResult {
  ag::Var logits;  // T x vocab_size
  Mat first_cross_attention;  // T x N, mean over heads; rows sum to 1
  std::map<std::string, ag::Var> leaves;  // parameter leaves of this graph
};

class Model {
 public:
  explicit Model(ModelConfig cfg);
  Model(ModelConfig cfg, ModelParams params);

  const ModelConfig& config() const { return cfg_; }
  const ModelParams& params() const { return params_; }
  ModelParams& params() { return params_; }

  // Encoder over features, decoder over token_ids with causal self-attention
  // and cross-attention to all frames. with_grad controls whether parameter
  // leaves track gradients.
  ForwardResult forward(const Mat& features, const std::vector<int>& token_ids, bool with_grad,
                        const WaApply* wa = nullptr) const;

 private:
  ModelConfig cfg_;
  ModelParams params_;
};

// Next-token cross-entropy restricted to loss-masked positions (standard
// shift: position t predicts token t+1).
ag::Var sequence_loss(const ForwardResult& fwd, const DecoderInput& input);

struct OptimConfig {
  double lr = 3e-4;
  int warmup_steps = 100;
  int epochs = 5;
  int batch_size = 8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled, skipped for biases and layernorm gains
  std::uint64_t seed = 0;
};

// Training consumes only (features, DecoderInput); verbatim references are
// structurally out of reach here.
struct TrainExample {
  Mat features;
  DecoderInput input;
};

struct TrainLog {
  std::vector<double> epoch_mean_loss;
};

// Adam with linear warmup and seed-deterministic shuffling. Throws on NaN
// loss, naming the offending batch.
TrainLog train(Model& model, const std::vector<TrainExample>& dataset, const OptimConfig& opt);

struct WaConfig {
  WaStrategy strategy = WaStrategy::none;
  bool all_layers = true;
  std::vector<int> layers;  // used when !all_layers
};

struct DecodeOutput {
  std::vector<int> tokens;  // generated target ids, <|eot|> excluded
  Mat cross_attention;      // prompt rows of the first-layer cross-attention
  double score = 0.0;       // mean log-probability of generated steps
};

// Greedy decoding with the prompt prefix
//   <|sop|> prompt <|sot|> <|lang|> <|transcribe|> <|notimestamps|>.
// The prefix pass captures first-layer cross-attention for prompt tokens;
// relevance weights are computed once and held fixed while generating.
// Strategy none (or an empty prompt) takes the plain decode path.
DecodeOutput greedy_decode(const Model& model, const Mat& features, const Vocab& vocab,
                           const std::string& subtitle, const WaConfig& wa = {});

// As greedy_decode but with explicit per-prompt-token factors (testing hook
// for the all-ones and all-zeros limits).
DecodeOutput greedy_decode_with_weights(const Model& model, const Mat& features, const Vocab& vocab,
                                        const std::string& subtitle, const std::vector<double>& g,
                                        const std::vector<int>& layers, bool scale_keys);

// Checkpoint container: magic, JSON manifest (config, seed, tensor table),
// raw float32 little-endian tensor data.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace subprompt
