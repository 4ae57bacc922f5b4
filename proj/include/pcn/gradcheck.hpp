// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pcn/model.hpp"
#include "pcn/trainer.hpp"

namespace pcn {

struct GradcheckConfig {
  ModelConfig model;
  TrainConfig train;
  /// Central-difference step. Smaller steps let float rounding dominate,
  /// larger ones start straddling relu and max-pool kinks.
  double step = 1e-5;
  /// Denominator floor of the relative error, so gradients that are zero
  /// up to rounding do not blow the ratio up.
  double floor = 1e-6;
  std::uint64_t seed = 0;
};

/// 2 layers, 4x4 spatial, 3 input channels, 5 steps, 2 classes, combined loss.
GradcheckConfig desk_gradcheck_config();

struct ParameterCheck {
  std::string name;
  std::size_t entries = 0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
};

struct GradcheckReport {
  std::vector<ParameterCheck> parameters;
  double max_rel_error = 0.0;
  std::size_t entries = 0;
};

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

/// Builds the model with random weights and random nonzero biases, draws a
/// random clip of features, then compares the analytic gradient of the
/// training loss against central differences for every trainable entry.
GradcheckReport gradient_check(const GradcheckConfig& config);

}  // namespace pcn
