#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "subprompt/mat.hpp"

namespace subprompt::ag {

// Reverse-mode autodiff over dense matrices. A graph is built per forward
// pass; backward() runs a topological sweep accumulating grads into each
// node. Leaves created with requires_grad keep their grads for reading.
struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Mat val;
  Mat grad;
  bool requires_grad = false;
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;  // propagates this->grad to parents

  void ensure_grad() {
    if (grad.rows != val.rows || grad.cols != val.cols) grad = Mat(val.rows, val.cols);
  }
};

Var leaf(Mat value, bool requires_grad = false);

// C = A B
Var matmul(const Var& a, const Var& b);
// C = A B^T
Var matmul_nt(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
// A + row vector b (1 x cols), broadcast over rows
Var add_rowvec(const Var& a, const Var& b);
Var scale(const Var& a, double c);
// rows of A scaled by fixed per-row factors (no grad through the factors)
Var rowscale_const(const Var& a, const std::vector<double>& factors);
Var gelu(const Var& a);  // tanh approximation, smooth everywhere
// Row softmax with optional additive mask (0 / -inf entries, same shape).
Var softmax_rows(const Var& a, const Mat* additive_mask = nullptr);
// Per-row layer norm with per-feature gain and bias (1 x cols each).
Var layernorm(const Var& a, const Var& gain, const Var& bias, double eps = 1e-5);
// Gather rows of an embedding table; backward scatter-adds.
Var embed(const Var& table, const std::vector<int>& ids);
Var concat_rows(const Var& a, const Var& b);
Var slice_cols(const Var& a, std::size_t c0, std::size_t c1);
Var concat_cols(const std::vector<Var>& parts);

// Mean cross-entropy over positions with mask true; targets index logits
// columns. Returns a 1x1 node. Throws when mask is all false.
Var masked_cross_entropy(const Var& logits, const std::vector<int>& targets,
                         const std::vector<std::uint8_t>& mask);

// Seeds root grad with ones and sweeps the graph.
void backward(const Var& root);

}  // namespace subprompt::ag
