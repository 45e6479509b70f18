#include "subprompt/autograd.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace subprompt::ag {

namespace {

Var make(Mat val, std::vector<Var> parents, std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->val = std::move(val);
  n->requires_grad = false;
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

}  // namespace

Var leaf(Mat value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->val = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

Var matmul(const Var& a, const Var& b) {
  Mat c = subprompt::matmul(a->val, b->val);
  return make(std::move(c), {a, b}, [a, b](Node& n) {
    // dA += dC B^T ; dB += A^T dC
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t i = 0; i < a->val.rows; ++i)
        for (std::size_t j = 0; j < b->val.cols; ++j) {
          double g = n.grad.at(i, j);
          if (g == 0.0) continue;
          for (std::size_t k = 0; k < a->val.cols; ++k) a->grad.at(i, k) += g * b->val.at(k, j);
        }
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t i = 0; i < a->val.rows; ++i)
        for (std::size_t k = 0; k < a->val.cols; ++k) {
          double av = a->val.at(i, k);
          if (av == 0.0) continue;
          for (std::size_t j = 0; j < b->val.cols; ++j) b->grad.at(k, j) += av * n.grad.at(i, j);
        }
    }
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  if (a->val.cols != b->val.cols) throw std::invalid_argument("matmul_nt: inner dims differ");
  Mat c(a->val.rows, b->val.rows);
  for (std::size_t i = 0; i < a->val.rows; ++i)
    for (std::size_t j = 0; j < b->val.rows; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a->val.cols; ++k) s += a->val.at(i, k) * b->val.at(j, k);
      c.at(i, j) = s;
    }
  return make(std::move(c), {a, b}, [a, b](Node& n) {
    // C = A B^T: dA += dC B ; dB += dC^T A
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t i = 0; i < a->val.rows; ++i)
        for (std::size_t j = 0; j < b->val.rows; ++j) {
          double g = n.grad.at(i, j);
          if (g == 0.0) continue;
          for (std::size_t k = 0; k < a->val.cols; ++k) a->grad.at(i, k) += g * b->val.at(j, k);
        }
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t i = 0; i < a->val.rows; ++i)
        for (std::size_t j = 0; j < b->val.rows; ++j) {
          double g = n.grad.at(i, j);
          if (g == 0.0) continue;
          for (std::size_t k = 0; k < a->val.cols; ++k) b->grad.at(j, k) += g * a->val.at(i, k);
        }
    }
  });
}

Var add(const Var& a, const Var& b) {
  if (!a->val.same_shape(b->val)) throw std::invalid_argument("add: shape mismatch");
  Mat c = a->val;
  for (std::size_t i = 0; i < c.size(); ++i) c.v[i] += b->val.v[i];
  return make(std::move(c), {a, b}, [a, b](Node& n) {
    for (Var p : {a, b}) {
      if (!p->requires_grad) continue;
      p->ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) p->grad.v[i] += n.grad.v[i];
    }
  });
}

Var add_rowvec(const Var& a, const Var& b) {
  if (b->val.rows != 1 || b->val.cols != a->val.cols)
    throw std::invalid_argument("add_rowvec: bias shape mismatch");
  Mat c = a->val;
  for (std::size_t i = 0; i < c.rows; ++i)
    for (std::size_t j = 0; j < c.cols; ++j) c.at(i, j) += b->val.at(0, j);
  return make(std::move(c), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) a->grad.v[i] += n.grad.v[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t i = 0; i < n.grad.rows; ++i)
        for (std::size_t j = 0; j < n.grad.cols; ++j) b->grad.at(0, j) += n.grad.at(i, j);
    }
  });
}

Var scale(const Var& a, double c) {
  Mat out = a->val;
  for (double& x : out.v) x *= c;
  return make(std::move(out), {a}, [a, c](Node& n) {
    a->ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) a->grad.v[i] += c * n.grad.v[i];
  });
}

Var rowscale_const(const Var& a, const std::vector<double>& factors) {
  if (factors.size() != a->val.rows) throw std::invalid_argument("rowscale_const: length mismatch");
  Mat out = a->val;
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j) out.at(i, j) *= factors[i];
  return make(std::move(out), {a}, [a, factors](Node& n) {
    a->ensure_grad();
    for (std::size_t i = 0; i < n.grad.rows; ++i)
      for (std::size_t j = 0; j < n.grad.cols; ++j) a->grad.at(i, j) += factors[i] * n.grad.at(i, j);
  });
}

Var gelu(const Var& a) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kA = 0.044715;
  Mat out = a->val;
  for (double& x : out.v) {
    double u = kC * (x + kA * x * x * x);
    x = 0.5 * x * (1.0 + std::tanh(u));
  }
  return make(std::move(out), {a}, [a](Node& n) {
    a->ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      double x = a->val.v[i];
      double u = kC * (x + kA * x * x * x);
      double t = std::tanh(u);
      double du = kC * (1.0 + 3.0 * kA * x * x);
      double d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
      a->grad.v[i] += d * n.grad.v[i];
    }
  });
}

Var softmax_rows(const Var& a, const Mat* additive_mask) {
  Mat m = a->val;
  if (additive_mask) {
    if (!additive_mask->same_shape(m)) throw std::invalid_argument("softmax: mask shape mismatch");
    for (std::size_t i = 0; i < m.size(); ++i) m.v[i] += additive_mask->v[i];
  }
  for (std::size_t i = 0; i < m.rows; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m.cols; ++j) mx = std::max(mx, m.at(i, j));
    if (mx == -std::numeric_limits<double>::infinity())
      throw std::invalid_argument("softmax_rows: fully masked row " + std::to_string(i));
    double denom = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) {
      double e = std::exp(m.at(i, j) - mx);
      m.at(i, j) = e;
      denom += e;
    }
    for (std::size_t j = 0; j < m.cols; ++j) m.at(i, j) /= denom;
  }
  return make(std::move(m), {a}, [a](Node& n) {
    a->ensure_grad();
    for (std::size_t i = 0; i < n.val.rows; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n.val.cols; ++j) dot += n.grad.at(i, j) * n.val.at(i, j);
      for (std::size_t j = 0; j < n.val.cols; ++j)
        a->grad.at(i, j) += n.val.at(i, j) * (n.grad.at(i, j) - dot);
    }
  });
}

Var layernorm(const Var& a, const Var& gain, const Var& bias, double eps) {
  const std::size_t cols = a->val.cols;
  if (gain->val.cols != cols || bias->val.cols != cols || gain->val.rows != 1 || bias->val.rows != 1)
    throw std::invalid_argument("layernorm: gain/bias shape mismatch");
  Mat out(a->val.rows, cols);
  Mat xhat(a->val.rows, cols);
  std::vector<double> inv_std(a->val.rows);
  for (std::size_t i = 0; i < a->val.rows; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < cols; ++j) mean += a->val.at(i, j);
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      double d = a->val.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < cols; ++j) {
      double xh = (a->val.at(i, j) - mean) * inv_std[i];
      xhat.at(i, j) = xh;
      out.at(i, j) = gain->val.at(0, j) * xh + bias->val.at(0, j);
    }
  }
  return make(std::move(out), {a, gain, bias},
              [a, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& n) {
                const std::size_t cols = a->val.cols;
                if (gain->requires_grad) gain->ensure_grad();
                if (bias->requires_grad) bias->ensure_grad();
                if (a->requires_grad) a->ensure_grad();
                for (std::size_t i = 0; i < n.val.rows; ++i) {
                  double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                  for (std::size_t j = 0; j < cols; ++j) {
                    double dy = n.grad.at(i, j);
                    if (gain->requires_grad) gain->grad.at(0, j) += dy * xhat.at(i, j);
                    if (bias->requires_grad) bias->grad.at(0, j) += dy;
                    double dxh = dy * gain->val.at(0, j);
                    mean_dxhat += dxh;
                    mean_dxhat_xhat += dxh * xhat.at(i, j);
                  }
                  if (!a->requires_grad) continue;
                  mean_dxhat /= static_cast<double>(cols);
                  mean_dxhat_xhat /= static_cast<double>(cols);
                  for (std::size_t j = 0; j < cols; ++j) {
                    double dxh = n.grad.at(i, j) * gain->val.at(0, j);
                    a->grad.at(i, j) +=
                        inv_std[i] * (dxh - mean_dxhat - xhat.at(i, j) * mean_dxhat_xhat);
                  }
                }
              });
}

Var embed(const Var& table, const std::vector<int>& ids) {
  Mat out(ids.size(), table->val.cols);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= table->val.rows)
      throw std::out_of_range("embed: id out of range");
    for (std::size_t j = 0; j < out.cols; ++j) out.at(i, j) = table->val.at(ids[i], j);
  }
  return make(std::move(out), {table}, [table, ids](Node& n) {
    table->ensure_grad();
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = 0; j < n.grad.cols; ++j)
        table->grad.at(ids[i], j) += n.grad.at(i, j);
  });
}

Var concat_rows(const Var& a, const Var& b) {
  if (a->val.cols != b->val.cols) throw std::invalid_argument("concat_rows: width mismatch");
  Mat out(a->val.rows + b->val.rows, a->val.cols);
  std::copy(a->val.v.begin(), a->val.v.end(), out.v.begin());
  std::copy(b->val.v.begin(), b->val.v.end(), out.v.begin() + static_cast<long>(a->val.size()));
  return make(std::move(out), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::size_t i = 0; i < a->val.size(); ++i) a->grad.v[i] += n.grad.v[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::size_t i = 0; i < b->val.size(); ++i)
        b->grad.v[i] += n.grad.v[a->val.size() + i];
    }
  });
}

Var slice_cols(const Var& a, std::size_t c0, std::size_t c1) {
  if (c1 > a->val.cols || c0 >= c1) throw std::invalid_argument("slice_cols: bad range");
  Mat out(a->val.rows, c1 - c0);
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j) out.at(i, j) = a->val.at(i, c0 + j);
  return make(std::move(out), {a}, [a, c0](Node& n) {
    a->ensure_grad();
    for (std::size_t i = 0; i < n.grad.rows; ++i)
      for (std::size_t j = 0; j < n.grad.cols; ++j) a->grad.at(i, c0 + j) += n.grad.at(i, j);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
  std::size_t rows = parts[0]->val.rows, cols = 0;
  for (const auto& p : parts) {
    if (p->val.rows != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += p->val.cols;
  }
  Mat out(rows, cols);
  std::size_t off = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < p->val.cols; ++j) out.at(i, off + j) = p->val.at(i, j);
    off += p->val.cols;
  }
  std::vector<Var> parents(parts.begin(), parts.end());
  return make(std::move(out), parents, [parts](Node& n) {
    std::size_t off = 0;
    for (const auto& p : parts) {
      if (p->requires_grad) {
        p->ensure_grad();
        for (std::size_t i = 0; i < p->val.rows; ++i)
          for (std::size_t j = 0; j < p->val.cols; ++j)
            p->grad.at(i, j) += n.grad.at(i, off + j);
      }
      off += p->val.cols;
    }
  });
}

Var masked_cross_entropy(const Var& logits, const std::vector<int>& targets,
                         const std::vector<std::uint8_t>& mask) {
  const std::size_t rows = logits->val.rows, cols = logits->val.cols;
  if (targets.size() != rows || mask.size() != rows)
    throw std::invalid_argument("masked_cross_entropy: length mismatch");
  std::size_t m_count = 0;
  Mat probs(rows, cols);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!mask[i]) continue;
    ++m_count;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cols; ++j) mx = std::max(mx, logits->val.at(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      double e = std::exp(logits->val.at(i, j) - mx);
      probs.at(i, j) = e;
      denom += e;
    }
    for (std::size_t j = 0; j < cols; ++j) probs.at(i, j) /= denom;
    int t = targets[i];
    if (t < 0 || static_cast<std::size_t>(t) >= cols)
      throw std::out_of_range("masked_cross_entropy: target out of range");
    total += -std::log(std::max(probs.at(i, t), 1e-300));
  }
  if (m_count == 0) throw std::invalid_argument("masked_cross_entropy: empty mask");
  Mat out(1, 1);
  out.at(0, 0) = total / static_cast<double>(m_count);
  return make(std::move(out), {logits},
              [logits, targets, mask, probs = std::move(probs), m_count](Node& n) {
                logits->ensure_grad();
                double g = n.grad.at(0, 0) / static_cast<double>(m_count);
                for (std::size_t i = 0; i < logits->val.rows; ++i) {
                  if (!mask[i]) continue;
                  for (std::size_t j = 0; j < logits->val.cols; ++j) {
                    double p = probs.at(i, j);
                    logits->grad.at(i, j) +=
                        g * (p - (static_cast<std::size_t>(targets[i]) == j ? 1.0 : 0.0));
                  }
                }
              });
}

void backward(const Var& root) {
  if (root->val.rows != 1 || root->val.cols != 1)
    throw std::invalid_argument("backward: root must be scalar");
  // topological order via DFS
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Var, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (seen.count(node.get())) {
      stack.pop_back();
      continue;
    }
    if (idx < node->parents.size()) {
      Var next = node->parents[idx++];
      if (!seen.count(next.get())) stack.emplace_back(next, 0);
    } else {
      seen.insert(node.get());
      order.push_back(node.get());
      stack.pop_back();
    }
  }
  for (Node* n : order) {
    n->ensure_grad();
    std::fill(n->grad.v.begin(), n->grad.v.end(), 0.0);
  }
  root->grad.at(0, 0) = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

}  // namespace subprompt::ag
