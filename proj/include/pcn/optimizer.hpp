// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>

#include "pcn/parameters.hpp"
#include "pcn/tensor.hpp"

namespace pcn {

/// SGD with momentum and coupled weight decay, in place:
///   g = grad + weight_decay * param
///   velocity = momentum * velocity + g
///   param -= lr * velocity
void sgd_update(std::span<double> param, std::span<const double> grad, std::span<double> velocity,
                double lr, double momentum, double weight_decay);

struct OptimizerState {
  double initial_lr = 0.0064;
  /// Number of 10x reductions applied so far.
  std::size_t lr_drops = 0;
  std::size_t epochs_since_best = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  /// Keyed by parameter name; shapes mirror the parameters.
  std::map<std::string, Tensor> velocity;

  double lr() const;
};

/// Reduce-on-plateau: an epoch improves when val_loss < best * (1 - threshold).
/// After more than `patience` epochs without improvement the rate drops 10x
/// and the counter resets. Returns true when the epoch improved.
bool plateau_schedule(OptimizerState& state, double val_loss, std::size_t patience,
                      double threshold);

/// One update over every parameter, creating zero velocity buffers on
/// first use. Throws NumericError if a parameter turns non-finite.
void apply_sgd(ParameterList& params, OptimizerState& state, double momentum, double weight_decay);

}  // namespace pcn
