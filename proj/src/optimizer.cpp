// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/optimizer.hpp"

#include <cmath>

#include "pcn/errors.hpp"

namespace pcn {

void sgd_update(std::span<double> param, std::span<const double> grad, std::span<double> velocity,
                double lr, double momentum, double weight_decay) {
  if (param.size() != grad.size() || param.size() != velocity.size()) {
    throw ConfigError("sgd_update: parameter, gradient and velocity sizes differ (" +
                      std::to_string(param.size()) + ", " + std::to_string(grad.size()) + ", " +
                      std::to_string(velocity.size()) + ")");
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i] + weight_decay * param[i];
    velocity[i] = momentum * velocity[i] + g;
    param[i] -= lr * velocity[i];
  }
}

double OptimizerState::lr() const {
  return initial_lr / std::pow(10.0, static_cast<double>(lr_drops));
}

bool plateau_schedule(OptimizerState& state, double val_loss, std::size_t patience,
                      double threshold) {
  if (!std::isfinite(val_loss)) throw NumericError("validation loss is not finite");
  const bool improved = val_loss < state.best_val_loss * (1.0 - threshold);
  if (improved) {
    state.best_val_loss = val_loss;
    state.epochs_since_best = 0;
    return true;
  }
  if (++state.epochs_since_best > patience) {
    ++state.lr_drops;
    state.epochs_since_best = 0;
  }
  return false;
}

void apply_sgd(ParameterList& params, OptimizerState& state, double momentum, double weight_decay) {
  const double lr = state.lr();
  for (auto& p : params) {
    auto it = state.velocity.find(p.name);
    if (it == state.velocity.end()) {
      it = state.velocity.emplace(p.name, Tensor(p.tensor.shape())).first;
    } else if (it->second.shape() != p.tensor.shape()) {
      throw ConfigError("velocity for " + p.name + " has shape " +
                        shape_to_string(it->second.shape()) + ", parameter has " +
                        shape_to_string(p.tensor.shape()));
    }
    sgd_update(p.tensor.values(), std::as_const(p.tensor).grad(), it->second.values(), lr, momentum,
               weight_decay);
    if (!p.tensor.all_finite()) throw NumericError("parameter " + p.name + " became non-finite");
  }
}

}  // namespace pcn
