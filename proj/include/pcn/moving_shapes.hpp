// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcn/feature_io.hpp"
#include "pcn/manifest.hpp"

namespace pcn {

enum class ShapeKind { kSquare, kDisc, kCross };

/// Synthetic clips of one shape drifting across a toroidal canvas.
///
/// Classes come in reversal pairs over a trajectory family (right/left,
/// down/up, ...). A reversed class's clip is a forward clip drawn from the
/// same distribution and played backwards, and every frame position is
/// uniform on the torus, so single frames carry no class information.
struct MovingShapesConfig {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t raw_length = 90;
  /// Even, 2..8 without speed variants; multiple of 4 up to 16 with.
  std::size_t num_classes = 4;
  /// Adds a fast (2x displacement per frame) copy of every class.
  bool speed_variants = false;
  std::vector<ShapeKind> shapes{ShapeKind::kSquare, ShapeKind::kDisc, ShapeKind::kCross};
  std::size_t min_size = 4;
  std::size_t max_size = 7;
  std::size_t min_speed = 1;
  std::size_t max_speed = 1;
  double min_intensity = 140.0;
  double max_intensity = 255.0;
  double noise_sigma = 8.0;
  std::size_t clips_per_class = 200;
  std::uint64_t seed = 7;

  void validate() const;
};

struct MotionClass {
  std::string name;
  int dy = 0;
  int dx = 0;
  std::size_t speed_factor = 1;
  bool reversed = false;
};

std::vector<MotionClass> motion_classes(const MovingShapesConfig& config);

struct MovingShapesDataset {
  std::vector<std::string> classes;
  std::vector<FeatureClip> clips;
};

/// clips_per_class clips per class, grouped by class. Clip i draws from an
/// RNG seeded by (seed, stream, i); use a different stream per split.
MovingShapesDataset generate_moving_shapes(const MovingShapesConfig& config,
                                           std::uint64_t stream = 0);

/// Writes every clip as <dir>/<split>/clip_NNNNN.pcfv and the manifest as
/// <dir>/<split>.json. Returns the manifest.
DatasetManifest write_moving_shapes(const MovingShapesDataset& data,
                                    const std::filesystem::path& dir, const std::string& split);

/// In-memory Dataset without touching disk.
Dataset to_dataset(MovingShapesDataset data, const std::string& split);

}  // namespace pcn
