// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "pcn/errors.hpp"
#include "pcn/ops.hpp"
#include "pcn/tape.hpp"

namespace pcn {

GradcheckConfig desk_gradcheck_config() {
  GradcheckConfig c;
  c.model.prednet.num_layers = 2;
  c.model.prednet.repr_channels = {2, 2};
  c.model.prednet.input_channels = 3;
  c.model.prednet.height = 4;
  c.model.prednet.width = 4;
  c.model.prednet.time_steps = 5;
  c.model.num_classes = 2;
  c.train.loss_mode = LossMode::kCombined;
  c.train.window = 5;
  return c;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradcheckReport gradient_check(const GradcheckConfig& config) {
  if (config.model.use_encoder) throw ConfigError("gradcheck runs on feature inputs");
  config.model.validate();
  config.train.validate();
  if (!(config.step > 0.0) || !(config.floor > 0.0)) {
    throw ConfigError("gradcheck step and floor must be > 0");
  }

  Rng rng(config.seed);
  ActionModel model(config.model);
  model.init(rng);

  // Nonzero biases exercise every bias path; the default init leaves most at 0.
  std::uniform_real_distribution<double> bias_dist(-0.5, 0.5);
  for (auto& p : model.parameters()) {
    if (p.name.size() >= 4 && p.name.compare(p.name.size() - 4, 4, "bias") == 0) {
      for (double& v : p.tensor.values()) v = bias_dist(rng);
    }
  }

  const auto& pc = config.model.prednet;
  std::uniform_real_distribution<double> feature_dist(0.0, 1.0);
  std::vector<Tensor> frames;
  for (std::size_t t = 0; t < pc.time_steps; ++t) {
    Tensor f({pc.input_channels, pc.height, pc.width});
    for (double& v : f.values()) v = feature_dist(rng);
    frames.push_back(f);
  }
  const std::size_t label = config.model.num_classes - 1;

  ParameterList params = model.trainable_parameters();
  zero_grads(params);
  {
    GradientTape tape;
    const ClipForward fwd = model.forward(tape, frames);
    tape.backward(compute_loss(tape, fwd, label, config.train));
  }

  const auto loss_at = [&](const Tensor&) {
    GradientTape tape(GradientTape::Mode::kInference);
    const ClipForward fwd = model.forward(tape, frames);
    return compute_loss(tape, fwd, label, config.train).item();
  };

  GradcheckReport report;
  for (auto& p : params) {
    const Tensor numeric = finite_difference_gradient(loss_at, p.tensor, config.step);
    const auto analytic = std::as_const(p.tensor).grad();
    ParameterCheck check;
    check.name = p.name;
    check.entries = p.tensor.numel();
    for (std::size_t i = 0; i < check.entries; ++i) {
      check.max_abs_error = std::max(check.max_abs_error, std::abs(analytic[i] - numeric[i]));
      check.max_rel_error =
          std::max(check.max_rel_error, relative_error(analytic[i], numeric[i], config.floor));
    }
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.entries += check.entries;
    report.parameters.push_back(check);
  }
  return report;
}

}  // namespace pcn
