#pragma once

// Independent reference implementations used only by tests. These must stay
// decoupled from the library code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "subprompt/mat.hpp"

namespace oracles {

// Gini via mean absolute difference: sum_ij |x_i - x_j| / (2 N^2 mean).
inline double gini_mad(const std::vector<double>& x) {
  const std::size_t n = x.size();
  double sum = 0.0, mad = 0.0;
  for (double v : x) sum += v;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) mad += std::abs(x[i] - x[j]);
  double mean = sum / static_cast<double>(n);
  return mad / (2.0 * static_cast<double>(n) * static_cast<double>(n) * mean);
}

// Exhaustive minimal edit distance (unit costs) by recursion.
inline long edit_distance_bruteforce(const std::vector<std::string>& ref,
                                     const std::vector<std::string>& hyp, std::size_t i = 0,
                                     std::size_t j = 0) {
  if (i == ref.size()) return static_cast<long>(hyp.size() - j);
  if (j == hyp.size()) return static_cast<long>(ref.size() - i);
  long best = edit_distance_bruteforce(ref, hyp, i + 1, j + 1) + (ref[i] == hyp[j] ? 0 : 1);
  best = std::min(best, edit_distance_bruteforce(ref, hyp, i + 1, j) + 1);
  best = std::min(best, edit_distance_bruteforce(ref, hyp, i, j + 1) + 1);
  return best;
}

// Plain scaled-dot-product attention with a boolean mask, written directly.
inline subprompt::Mat attention_reference(const subprompt::Mat& q, const subprompt::Mat& k,
                                          const subprompt::Mat& v,
                                          const std::vector<std::uint8_t>& mask) {
  subprompt::Mat h(q.rows, v.cols);
  for (std::size_t i = 0; i < q.rows; ++i) {
    std::vector<double> w(k.rows, 0.0);
    double denom = 0.0;
    for (std::size_t j = 0; j < k.rows; ++j) {
      if (!mask[i * k.rows + j]) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < q.cols; ++c) s += q.at(i, c) * k.at(j, c);
      w[j] = std::exp(s / std::sqrt(static_cast<double>(q.cols)));
      denom += w[j];
    }
    for (std::size_t j = 0; j < k.rows; ++j)
      for (std::size_t c = 0; c < v.cols; ++c) h.at(i, c) += w[j] / denom * v.at(j, c);
  }
  return h;
}

}  // namespace oracles
