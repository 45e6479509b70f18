#include "subprompt/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace subprompt {

WaStrategy wa_strategy_from_string(const std::string& s) {
  if (s == "none") return WaStrategy::none;
  if (s == "gini") return WaStrategy::gini;
  if (s == "max") return WaStrategy::max;
  if (s == "entropy") return WaStrategy::entropy;
  throw std::invalid_argument("unknown wa strategy: " + s);
}

std::string to_string(WaStrategy s) {
  switch (s) {
    case WaStrategy::none: return "none";
    case WaStrategy::gini: return "gini";
    case WaStrategy::max: return "max";
    case WaStrategy::entropy: return "entropy";
  }
  return "?";
}

RelevanceWeights gini_weights(const Mat& ca_rows) {
  const std::size_t n = ca_rows.cols;
  RelevanceWeights w;
  w.strategy = WaStrategy::gini;
  w.g.reserve(ca_rows.rows);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < ca_rows.rows; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      double x = ca_rows.at(i, k);
      if (x < 0.0) throw std::invalid_argument("gini_weights: negative attention weight");
      row[k] = x;
    }
    std::sort(row.begin(), row.end());
    // summed in sorted order so the result is bit-invariant under permutation
    double sum = 0.0;
    for (double x : row) sum += x;
    if (sum <= 0.0) throw std::invalid_argument("gini_weights: zero row");
    double num = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      num += (2.0 * static_cast<double>(k + 1) - static_cast<double>(n) - 1.0) * row[k];
    w.g.push_back(num / (static_cast<double>(n) * sum));
  }
  return w;
}

RelevanceWeights max_weights(const Mat& ca_rows) {
  RelevanceWeights w;
  w.strategy = WaStrategy::max;
  for (std::size_t i = 0; i < ca_rows.rows; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ca_rows.cols; ++k) m = std::max(m, ca_rows.at(i, k));
    w.g.push_back(m);
  }
  return w;
}

RelevanceWeights entropy_weights(const Mat& ca_rows) {
  const std::size_t n = ca_rows.cols;
  RelevanceWeights w;
  w.strategy = WaStrategy::entropy;
  for (std::size_t i = 0; i < ca_rows.rows; ++i) {
    if (n == 1) {
      w.g.push_back(1.0);
      continue;
    }
    double h = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double p = ca_rows.at(i, k);
      if (p > 0.0) h -= p * std::log(p);
    }
    w.g.push_back(1.0 - h / std::log(static_cast<double>(n)));
  }
  return w;
}

RelevanceWeights relevance_weights(WaStrategy strategy, const Mat& ca_rows) {
  switch (strategy) {
    case WaStrategy::gini: return gini_weights(ca_rows);
    case WaStrategy::max: return max_weights(ca_rows);
    case WaStrategy::entropy: return entropy_weights(ca_rows);
    case WaStrategy::none: {
      RelevanceWeights w;
      w.strategy = WaStrategy::none;
      w.g.assign(ca_rows.rows, 1.0);
      return w;
    }
  }
  throw std::logic_error("unreachable");
}

std::pair<Mat, Mat> weighted_kv(const RelevanceWeights& g, const Mat& k_prompt,
                                const Mat& k_target, const Mat& v_prompt, const Mat& v_target) {
  if (g.g.size() != k_prompt.rows || g.g.size() != v_prompt.rows)
    throw std::invalid_argument("weighted_kv: weight length != prompt rows");
  if (k_prompt.rows && k_target.rows && k_prompt.cols != k_target.cols)
    throw std::invalid_argument("weighted_kv: key width mismatch");
  if (v_prompt.rows && v_target.rows && v_prompt.cols != v_target.cols)
    throw std::invalid_argument("weighted_kv: value width mismatch");
  auto combine = [&](const Mat& p, const Mat& t) {
    std::size_t cols = p.rows ? p.cols : t.cols;
    Mat out(p.rows + t.rows, cols);
    for (std::size_t i = 0; i < p.rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) out.at(i, j) = g.g[i] * p.at(i, j);
    for (std::size_t i = 0; i < t.rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) out.at(p.rows + i, j) = t.at(i, j);
    return out;
  };
  return {combine(k_prompt, k_target), combine(v_prompt, v_target)};
}

Mat attention(const Mat& q, const Mat& k, const Mat& v, const std::vector<std::uint8_t>& mask) {
  if (q.cols != k.cols || k.rows != v.rows)
    throw std::invalid_argument("attention: shape mismatch");
  if (mask.size() != q.rows * k.rows) throw std::invalid_argument("attention: mask size mismatch");
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols));
  Mat h(q.rows, v.cols);
  std::vector<double> scores(k.rows);
  for (std::size_t i = 0; i < q.rows; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k.rows; ++j) {
      if (!mask[i * k.rows + j]) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < q.cols; ++c) s += q.at(i, c) * k.at(j, c);
      scores[j] = s * scale;
      mx = std::max(mx, scores[j]);
    }
    if (mx == -std::numeric_limits<double>::infinity())
      throw std::invalid_argument("attention: fully masked row " + std::to_string(i));
    double denom = 0.0;
    for (std::size_t j = 0; j < k.rows; ++j) {
      if (!mask[i * k.rows + j]) {
        scores[j] = 0.0;
        continue;
      }
      scores[j] = std::exp(scores[j] - mx);
      denom += scores[j];
    }
    for (std::size_t j = 0; j < k.rows; ++j) {
      double p = scores[j] / denom;
      if (p == 0.0) continue;
      for (std::size_t c = 0; c < v.cols; ++c) h.at(i, c) += p * v.at(j, c);
    }
  }
  return h;
}

}  // namespace subprompt
