// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/moving_shapes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "pcn/errors.hpp"
#include "pcn/parameters.hpp"

namespace pcn {
namespace {

struct Family {
  const char* forward;
  const char* backward;
  int dy;
  int dx;
};

constexpr Family kFamilies[] = {
    {"right", "left", 0, 1},
    {"down", "up", 1, 0},
    {"down_right", "up_left", 1, 1},
    {"down_left", "up_right", 1, -1},
};

std::vector<std::pair<int, int>> shape_mask(ShapeKind kind, std::size_t size) {
  const int s = static_cast<int>(size);
  const double c = (s - 1) / 2.0;
  std::vector<std::pair<int, int>> mask;
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      bool on = false;
      switch (kind) {
        case ShapeKind::kSquare:
          on = true;
          break;
        case ShapeKind::kDisc:
          on = (y - c) * (y - c) + (x - c) * (x - c) <= (s / 2.0) * (s / 2.0);
          break;
        case ShapeKind::kCross: {
          const double arm = std::max(1.0, s / 3.0) / 2.0;
          on = std::fabs(y - c) < arm || std::fabs(x - c) < arm;
          break;
        }
      }
      if (on) mask.emplace_back(y, x);
    }
  }
  return mask;
}

// A forward trajectory: the shape starts uniformly on the torus and moves
// by (dy, dx) * speed each frame.
std::vector<float> render_forward(const MovingShapesConfig& cfg, const MotionClass& cls, Rng& rng) {
  const long h = static_cast<long>(cfg.height), w = static_cast<long>(cfg.width);
  std::uniform_int_distribution<std::size_t> kind_dist(0, cfg.shapes.size() - 1);
  std::uniform_int_distribution<std::size_t> size_dist(cfg.min_size, cfg.max_size);
  std::uniform_int_distribution<std::size_t> speed_dist(cfg.min_speed, cfg.max_speed);
  std::uniform_int_distribution<long> y_dist(0, h - 1), x_dist(0, w - 1);
  std::uniform_real_distribution<double> intensity_dist(cfg.min_intensity, cfg.max_intensity);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);

  const ShapeKind kind = cfg.shapes[kind_dist(rng)];
  const auto mask = shape_mask(kind, size_dist(rng));
  const long speed = static_cast<long>(speed_dist(rng) * cls.speed_factor);
  const long y0 = y_dist(rng), x0 = x_dist(rng);
  const double intensity = intensity_dist(rng);

  const std::size_t plane = cfg.height * cfg.width;
  std::vector<float> frames(cfg.raw_length * plane);
  std::vector<double> canvas(plane);
  for (std::size_t t = 0; t < cfg.raw_length; ++t) {
    std::fill(canvas.begin(), canvas.end(), 0.0);
    const long ty = y0 + cls.dy * speed * static_cast<long>(t);
    const long tx = x0 + cls.dx * speed * static_cast<long>(t);
    for (const auto& [my, mx] : mask) {
      const long y = ((ty + my) % h + h) % h;
      const long x = ((tx + mx) % w + w) % w;
      canvas[static_cast<std::size_t>(y * w + x)] = intensity;
    }
    for (std::size_t j = 0; j < plane; ++j) {
      double v = canvas[j];
      if (cfg.noise_sigma > 0.0) v += noise(rng);
      // + 0.0 turns a rounded -0 into +0.
      frames[t * plane + j] = static_cast<float>(std::clamp(std::round(v), 0.0, 255.0) + 0.0);
    }
  }
  return frames;
}

}  // namespace

void MovingShapesConfig::validate() const {
  const std::size_t families = speed_variants ? num_classes / 4 : num_classes / 2;
  const std::size_t unit = speed_variants ? 4 : 2;
  if (num_classes < 2 || num_classes % unit != 0 || families > std::size(kFamilies)) {
    throw ConfigError("moving shapes needs an even class count of at most 8 (multiple of 4, at "
                      "most 16, with speed variants); got " + std::to_string(num_classes));
  }
  if (shapes.empty()) throw ConfigError("no shape kinds configured");
  if (min_size < 1 || min_size > max_size) throw ConfigError("invalid shape size range");
  if (max_size > std::min(height, width)) {
    throw ConfigError("canvas " + std::to_string(height) + "x" + std::to_string(width) +
                      " is too small for shapes of size " + std::to_string(max_size));
  }
  if (min_speed > max_speed) throw ConfigError("invalid speed range");
  if (raw_length < 1) throw ConfigError("raw clip length must be >= 1");
  if (clips_per_class < 1) throw ConfigError("clips per class must be >= 1");
  if (noise_sigma < 0.0) throw ConfigError("noise sigma must be nonnegative");
}

std::vector<MotionClass> motion_classes(const MovingShapesConfig& config) {
  config.validate();
  const std::size_t families = config.speed_variants ? config.num_classes / 4 : config.num_classes / 2;
  std::vector<MotionClass> out;
  for (std::size_t f = 0; f < families; ++f) {
    const Family& fam = kFamilies[f];
    for (std::size_t factor : config.speed_variants ? std::vector<std::size_t>{1, 2}
                                                    : std::vector<std::size_t>{1}) {
      const std::string suffix = config.speed_variants ? (factor == 1 ? "_slow" : "_fast") : "";
      out.push_back({fam.forward + suffix, fam.dy, fam.dx, factor, false});
      out.push_back({fam.backward + suffix, fam.dy, fam.dx, factor, true});
    }
  }
  return out;
}

MovingShapesDataset generate_moving_shapes(const MovingShapesConfig& config, std::uint64_t stream) {
  const auto classes = motion_classes(config);
  MovingShapesDataset data;
  for (const auto& c : classes) data.classes.push_back(c.name);
  const std::size_t plane = config.height * config.width;
  for (std::size_t label = 0; label < classes.size(); ++label) {
    for (std::size_t k = 0; k < config.clips_per_class; ++k) {
      const std::size_t index = label * config.clips_per_class + k;
      std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                        static_cast<std::uint32_t>(config.seed >> 32),
                        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
      Rng rng(seq);
      FeatureClip clip;
      clip.num_frames = config.raw_length;
      clip.channels = 1;
      clip.height = config.height;
      clip.width = config.width;
      clip.label = label;
      clip.pixels = true;
      clip.frames = render_forward(config, classes[label], rng);
      if (classes[label].reversed) {
        std::vector<float> reversed(clip.frames.size());
        for (std::size_t t = 0; t < clip.num_frames; ++t) {
          std::copy_n(clip.frames.begin() + static_cast<long>((clip.num_frames - 1 - t) * plane),
                      plane, reversed.begin() + static_cast<long>(t * plane));
        }
        clip.frames = std::move(reversed);
      }
      char id[32];
      std::snprintf(id, sizeof id, "clip_%05zu", index);
      clip.source_id = id;
      data.clips.push_back(std::move(clip));
    }
  }
  return data;
}

DatasetManifest write_moving_shapes(const MovingShapesDataset& data,
                                    const std::filesystem::path& dir, const std::string& split) {
  std::filesystem::create_directories(dir / split);
  DatasetManifest m;
  m.classes = data.classes;
  m.split = split;
  for (const auto& clip : data.clips) {
    const std::string rel = split + "/" + clip.source_id + ".pcfv";
    write_feature_clip(clip, dir / rel);
    m.entries.push_back({rel, clip.label, clip.num_frames});
  }
  write_manifest(m, dir / (split + ".json"));
  return m;
}

Dataset to_dataset(MovingShapesDataset data, const std::string& split) {
  Dataset ds;
  ds.manifest.classes = data.classes;
  ds.manifest.split = split;
  for (const auto& clip : data.clips) {
    ds.manifest.entries.push_back({split + "/" + clip.source_id + ".pcfv", clip.label, clip.num_frames});
  }
  ds.clips = std::move(data.clips);
  return ds;
}

}  // namespace pcn
