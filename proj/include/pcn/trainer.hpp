// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcn/checkpoint.hpp"
#include "pcn/manifest.hpp"
#include "pcn/model.hpp"
#include "pcn/optimizer.hpp"

namespace pcn {

enum class LossMode { kClassification, kPredictionError, kCombined };

std::string to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& name);

struct TrainConfig {
  double learning_rate = 0.0064;
  double momentum = 0.9;
  double weight_decay = 0.001;
  std::size_t batch_size = 256;
  std::size_t epochs = 40;
  std::size_t patience = 3;
  double threshold = 1e-3;
  LossMode loss_mode = LossMode::kClassification;
  /// Weight of the prediction-error term in combined mode.
  double alpha = 0.1;
  /// Average per-step cross-entropies instead of scoring the averaged logits.
  bool per_step_loss = false;
  /// Consecutive-frame window drawn from each clip before subsampling.
  std::size_t window = 90;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Window + subsample indices, then the model inputs for those frames
/// (preprocessed images with the encoder on, raw features otherwise).
std::vector<Tensor> gather_inputs(const FeatureClip& clip, std::span<const std::size_t> frames,
                                  const ModelConfig& model);
std::vector<Tensor> train_inputs(const FeatureClip& clip, const ModelConfig& model,
                                 std::size_t window, Rng& rng);
std::vector<Tensor> eval_inputs(const FeatureClip& clip, const ModelConfig& model,
                                std::size_t window);

/// classification: cross-entropy of the time-averaged logits.
/// prediction_error: the PredNet error loss with default weights.
/// combined: classification + alpha * prediction_error.
Tensor compute_loss(GradientTape& tape, const ClipForward& forward, std::size_t label,
                    const TrainConfig& config);

struct EpochStats {
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

/// One pass over the shuffled dataset: per-clip gradients averaged over each
/// mini-batch, then one SGD step for every trainable parameter.
EpochStats train_epoch(ActionModel& model, const Dataset& data, const TrainConfig& config,
                       OptimizerState& optimizer, Rng& rng);

/// Mean loss and top-1 over deterministic eval sampling.
EpochStats evaluate_loss(const ActionModel& model, const Dataset& data, const TrainConfig& config);

struct LogRow {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

std::string format_log_csv(std::span<const LogRow> rows);

struct FitOptions {
  /// When set: last.ckpt, best.ckpt and train_log.csv are written here.
  std::optional<std::filesystem::path> out_dir;
  /// Continue from this checkpoint (parameters, optimizer, RNG, epoch).
  const Checkpoint* resume = nullptr;
  std::function<void(const LogRow&)> on_epoch;
};

struct FitResult {
  std::vector<LogRow> log;
  Checkpoint last;
  Checkpoint best;
};

/// Runs epochs up to config.epochs, applying the plateau schedule to the
/// validation loss and keeping the best-validation checkpoint. Parameters
/// and velocities are rounded to float32 at each epoch boundary so a
/// checkpoint captures the exact training state.
FitResult fit(ActionModel& model, const Dataset& train, const Dataset& val,
              const TrainConfig& config, const FitOptions& options = {});

}  // namespace pcn
