// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcn/encoder.hpp"
#include "pcn/parameters.hpp"
#include "pcn/preprocess.hpp"
#include "pcn/prednet.hpp"
#include "pcn/tape.hpp"
#include "pcn/tensor.hpp"

namespace pcn {

/// Global max-pool of A_0 and every R_l, concatenated in that order.
/// With include_reprs = false only A_0 is pooled (frame-only baseline).
Tensor fuse_step_features(GradientTape& tape, const StepOutput& step, bool include_reprs = true);

/// Linear classifier over a fused feature: weight [K, fused_len], bias [K].
struct FusionHead {
  Tensor weight;
  Tensor bias;

  FusionHead() = default;
  FusionHead(std::size_t fused_length, std::size_t num_classes);

  void init(Rng& rng);
  std::size_t num_classes() const { return bias.dim(0); }
  std::size_t fused_length() const { return weight.dim(1); }
  ParameterList parameters(const std::string& prefix = "head") const;

  /// Raw logits; no softmax.
  Tensor classify(GradientTape& tape, const Tensor& fused) const;
};

/// Elementwise mean of per-step score vectors.
Tensor aggregate_scores(GradientTape& tape, std::span<const Tensor> scores);

/// Index of the largest value; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

struct ModelConfig {
  PredNetConfig prednet;
  std::size_t num_classes = 2;
  /// false: frame-only baseline (A_0 pooled, no recurrence).
  bool use_prednet = true;
  bool prednet_trainable = true;
  /// Frames are raw images run through the built-in encoder.
  bool use_encoder = false;
  EncoderConfig encoder;
  PreprocessConfig preprocess;

  void validate() const;
  std::size_t fused_length() const;
};

struct ClipForward {
  std::vector<StepOutput> steps;
  std::vector<Tensor> step_scores;
  Tensor scores;  // time-averaged logits
};

struct ClipPrediction {
  std::size_t label = 0;
  std::vector<double> scores;
  std::vector<std::vector<double>> step_scores;
};

/// Optional frame encoder, PredNet and fusion head.
class ActionModel {
 public:
  explicit ActionModel(ModelConfig config);

  /// Random start for every component (same seed, same weights).
  void init(Rng& rng);

  const ModelConfig& config() const { return config_; }
  PredNet& prednet() { return prednet_; }
  const PredNet& prednet() const { return prednet_; }
  FusionHead& head() { return head_; }
  const FusionHead& head() const { return head_; }
  FrameEncoder* encoder() { return encoder_ ? &*encoder_ : nullptr; }
  const FrameEncoder* encoder() const { return encoder_ ? &*encoder_ : nullptr; }

  /// Every tensor, trainable or not.
  ParameterList parameters() const;
  /// Tensors that receive optimizer updates.
  ParameterList trainable_parameters() const;

  /// frames: preprocessed images when the encoder is on, [C0,H,W] features
  /// otherwise. Length must equal prednet.time_steps.
  ClipForward forward(GradientTape& tape, std::span<const Tensor> frames) const;

 private:
  ModelConfig config_;
  std::optional<FrameEncoder> encoder_;
  PredNet prednet_;
  FusionHead head_;
};

/// Forward without recording, aggregate, argmax.
ClipPrediction predict_clip(const ActionModel& model, std::span<const Tensor> frames);

}  // namespace pcn
