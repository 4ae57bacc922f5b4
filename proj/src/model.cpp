// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/model.hpp"

#include <algorithm>
#include <cmath>

#include "pcn/errors.hpp"
#include "pcn/ops.hpp"

namespace pcn {

Tensor fuse_step_features(GradientTape& tape, const StepOutput& step, bool include_reprs) {
  std::vector<Tensor> pooled;
  pooled.push_back(ops::global_max_pool(tape, step.input));
  if (include_reprs) {
    for (const Tensor& r : step.reprs) pooled.push_back(ops::global_max_pool(tape, r));
  }
  return ops::channel_concat(tape, pooled);
}

FusionHead::FusionHead(std::size_t fused_length, std::size_t num_classes)
    : weight({num_classes, fused_length}), bias({num_classes}) {
  weight.set_requires_grad();
  bias.set_requires_grad();
}

void FusionHead::init(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fused_length()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : weight.values()) v = dist(rng);
  for (double& v : bias.values()) v = 0.0;
}

ParameterList FusionHead::parameters(const std::string& prefix) const {
  return {{prefix + ".bias", bias}, {prefix + ".weight", weight}};
}

Tensor FusionHead::classify(GradientTape& tape, const Tensor& fused) const {
  if (fused.rank() != 1 || fused.dim(0) != fused_length()) {
    throw ConfigError("fused feature " + shape_to_string(fused.shape()) +
                      " does not match head input length " + std::to_string(fused_length()));
  }
  return ops::linear(tape, fused, weight, bias);
}

Tensor aggregate_scores(GradientTape& tape, std::span<const Tensor> scores) {
  if (scores.empty()) throw UsageError("cannot aggregate an empty list of score vectors");
  return ops::mean_of(tape, scores);
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw UsageError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void ModelConfig::validate() const {
  prednet.validate();
  if (num_classes < 1) throw ConfigError("model needs at least one class");
  if (use_encoder) {
    if (encoder.out_channels != prednet.input_channels || encoder.out_height != prednet.height ||
        encoder.out_width != prednet.width) {
      throw ConfigError("encoder output [" + std::to_string(encoder.out_channels) + "," +
                        std::to_string(encoder.out_height) + "," + std::to_string(encoder.out_width) +
                        "] does not match PredNet input " +
                        shape_to_string({prednet.input_channels, prednet.height, prednet.width}));
    }
  }
}

std::size_t ModelConfig::fused_length() const {
  return use_prednet ? prednet.fused_length() : prednet.input_channels;
}

ActionModel::ActionModel(ModelConfig config)
    : config_(std::move(config)),
      prednet_((config_.validate(), config_.prednet)),
      head_(config_.fused_length(), config_.num_classes) {
  if (config_.use_encoder) encoder_.emplace(config_.encoder);
  for (auto& p : prednet_.parameters()) p.tensor.set_requires_grad(config_.prednet_trainable);
}

void ActionModel::init(Rng& rng) {
  if (encoder_) encoder_->init(rng);
  prednet_.init(rng);
  head_.init(rng);
}

ParameterList ActionModel::parameters() const {
  ParameterList out;
  if (encoder_) {
    auto e = encoder_->parameters();
    out.insert(out.end(), e.begin(), e.end());
  }
  if (config_.use_prednet) {
    auto p = prednet_.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  auto h = head_.parameters();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

ParameterList ActionModel::trainable_parameters() const {
  ParameterList all = parameters();
  ParameterList out;
  for (auto& p : all) {
    if (p.tensor.requires_grad()) out.push_back(p);
  }
  return out;
}

ClipForward ActionModel::forward(GradientTape& tape, std::span<const Tensor> frames) const {
  if (frames.size() != config_.prednet.time_steps) {
    throw InputError("clip has " + std::to_string(frames.size()) + " frames, model expects " +
                     std::to_string(config_.prednet.time_steps));
  }
  std::vector<Tensor> features;
  features.reserve(frames.size());
  for (const Tensor& f : frames) features.push_back(encoder_ ? encoder_->encode(tape, f) : f);

  ClipForward out;
  if (config_.use_prednet) {
    out.steps = prednet_.unroll(tape, features);
  } else {
    const Shape expected{config_.prednet.input_channels, config_.prednet.height,
                         config_.prednet.width};
    for (std::size_t t = 0; t < features.size(); ++t) {
      if (features[t].shape() != expected) {
        throw InputError("frame feature " + shape_to_string(features[t].shape()) +
                         " does not match " + shape_to_string(expected));
      }
      StepOutput s;
      s.t = t;
      s.input = features[t];
      out.steps.push_back(std::move(s));
    }
  }
  for (const auto& step : out.steps) {
    out.step_scores.push_back(head_.classify(tape, fuse_step_features(tape, step, config_.use_prednet)));
  }
  out.scores = aggregate_scores(tape, out.step_scores);
  return out;
}

ClipPrediction predict_clip(const ActionModel& model, std::span<const Tensor> frames) {
  GradientTape tape(GradientTape::Mode::kInference);
  const ClipForward fwd = model.forward(tape, frames);
  ClipPrediction p;
  const auto s = fwd.scores.values();
  p.scores.assign(s.begin(), s.end());
  p.label = argmax(p.scores);
  for (const auto& st : fwd.step_scores) {
    const auto v = st.values();
    p.step_scores.emplace_back(v.begin(), v.end());
  }
  return p;
}

}  // namespace pcn
