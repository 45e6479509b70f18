#pragma once

#include <string>
#include <utility>
#include <vector>

#include "subprompt/mat.hpp"

namespace subprompt {

enum class WaStrategy { none, gini, max, entropy };

WaStrategy wa_strategy_from_string(const std::string& s);
std::string to_string(WaStrategy s);

// First-layer cross-attention weights for prompt tokens: rows are
// distributions over the N audio frames.
struct AttentionMaps {
  Mat ca;  // T_text x N, rows sum to 1
  int layer_index = 0;
};

struct RelevanceWeights {
  std::vector<double> g;  // length T_p
  WaStrategy strategy = WaStrategy::none;
};

// Per-row inequality of the attention mass over frames: 0 for a uniform row,
// (N-1)/N for a one-hot row. Values are sorted ascending before applying
//   g_i = sum_k (2k - N - 1) x_(k) / (N * sum_k x_(k)),  k = 1..N.
RelevanceWeights gini_weights(const Mat& ca_rows);

// g_i = max_k ca[i,k]
RelevanceWeights max_weights(const Mat& ca_rows);

// g_i = 1 - H(ca[i,.]) / ln N, Shannon entropy in nats; 1 when N == 1.
RelevanceWeights entropy_weights(const Mat& ca_rows);

RelevanceWeights relevance_weights(WaStrategy strategy, const Mat& ca_rows);

// K' = rowscale(g, K_p) ++ K_t, same for V'. Sequence length T = T_p + T_t.
std::pair<Mat, Mat> weighted_kv(const RelevanceWeights& g, const Mat& k_prompt,
                                const Mat& k_target, const Mat& v_prompt, const Mat& v_target);

// H = softmax(Q K^T / sqrt(d) + additive mask) V, row-max-stabilized softmax.
// mask[i*T+j] true means position i may attend to j; a fully masked row throws.
Mat attention(const Mat& q, const Mat& k, const Mat& v, const std::vector<std::uint8_t>& mask);

}  // namespace subprompt
