// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "pcn/model.hpp"
#include "pcn/optimizer.hpp"
#include "pcn/parameters.hpp"

namespace pcn {

// PCCK container, little-endian:
//   "PCCK" | u32 version | u32 count
//   count x (u16 name_len | name | u8 ndim | u32 dims[ndim] | f32 payload)
//   u64 trailer_len | JSON trailer
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Named tensors (model parameters and optimizer velocities) plus a JSON
/// trailer with optimizer scalars, epoch, RNG state and a config echo.
/// Tensors are kept sorted by name.
struct Checkpoint {
  ParameterList tensors;
  nlohmann::json trailer = nlohmann::json::object();

  const Tensor* find(const std::string& name) const;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Prefix of velocity tensors inside a checkpoint.
inline constexpr const char* kVelocityPrefix = "optimizer.velocity.";

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

Checkpoint make_checkpoint(const ActionModel& model, const OptimizerState& optimizer,
                           std::size_t epoch, const Rng& rng, const nlohmann::json& config_echo);

/// Copies parameter values into the model; every model tensor must be present.
void restore_parameters(const Checkpoint& ckpt, ActionModel& model);
OptimizerState restore_optimizer(const Checkpoint& ckpt);
Rng restore_rng(const Checkpoint& ckpt);
std::size_t checkpoint_epoch(const Checkpoint& ckpt);

/// Builds a model from the trailer's config echo and loads its parameters.
ActionModel model_from_checkpoint(const Checkpoint& ckpt);

/// Rounds every value to the nearest float32, the precision checkpoints store.
void round_to_float32(std::span<double> values);

}  // namespace pcn
