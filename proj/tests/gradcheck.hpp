#pragma once

// Finite-difference gradient checking over every model parameter.

#include <cmath>
#include <string>

#include "subprompt/model.hpp"

namespace gradcheck {

struct Result {
  double max_rel_error = 0.0;
  std::string worst_param;
  long n_checked = 0;
};

inline double loss_value(subprompt::Model& model, const subprompt::TrainExample& ex) {
  auto fwd = model.forward(ex.features, ex.input.ids, false);
  return subprompt::sequence_loss(fwd, ex.input)->val.at(0, 0);
}

// Central differences at step eps against reverse-mode grads.
inline Result check_all_params(subprompt::Model& model, const subprompt::TrainExample& ex,
                               double eps = 1e-4) {
  auto fwd = model.forward(ex.features, ex.input.ids, true);
  auto loss = subprompt::sequence_loss(fwd, ex.input);
  subprompt::ag::backward(loss);

  Result res;
  for (auto& [name, param] : model.params().t) {
    const subprompt::Mat& grad = fwd.leaves.at(name)->grad;
    for (std::size_t i = 0; i < param.size(); ++i) {
      double orig = param.v[i];
      param.v[i] = orig + eps;
      double up = loss_value(model, ex);
      param.v[i] = orig - eps;
      double down = loss_value(model, ex);
      param.v[i] = orig;
      double fd = (up - down) / (2.0 * eps);
      double g = grad.size() ? grad.v[i] : 0.0;
      double denom = std::max({1e-6, std::abs(fd), std::abs(g)});
      double rel = std::abs(fd - g) / denom;
      ++res.n_checked;
      if (rel > res.max_rel_error) {
        res.max_rel_error = rel;
        res.worst_param = name;
      }
    }
  }
  return res;
}

}  // namespace gradcheck
