// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/preprocess.hpp"

#include <string>

#include "pcn/errors.hpp"

namespace pcn {

Tensor center_crop(const Tensor& image, std::size_t crop) {
  if (image.rank() != 3) throw InputError("image must be [C,H,W], got " + shape_to_string(image.shape()));
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  if (crop == 0 || h < crop || w < crop) {
    throw InputError("image " + shape_to_string(image.shape()) + " is smaller than crop " +
                     std::to_string(crop));
  }
  const std::size_t y0 = (h - crop) / 2, x0 = (w - crop) / 2;
  Tensor out({c, crop, crop});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < crop; ++y) {
      for (std::size_t x = 0; x < crop; ++x) {
        out[(ch * crop + y) * crop + x] = image[(ch * h + y0 + y) * w + x0 + x];
      }
    }
  }
  return out;
}

Tensor preprocess_frame(const Tensor& image, const PreprocessConfig& config) {
  Tensor out = center_crop(image, config.crop);
  const std::size_t c = out.dim(0), plane = config.crop * config.crop;
  auto pick = [c](const std::vector<double>& v, std::size_t ch, const char* what) {
    if (v.size() == 1) return v[0];
    if (v.size() != c) {
      throw ConfigError(std::string("normalization ") + what + " has " + std::to_string(v.size()) +
                        " entries for " + std::to_string(c) + " channels");
    }
    return v[ch];
  };
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double m = pick(config.mean, ch, "mean");
    const double s = pick(config.std, ch, "std");
    if (s <= 0.0) throw ConfigError("normalization std must be positive");
    for (std::size_t j = 0; j < plane; ++j) {
      double& v = out[ch * plane + j];
      v = (v / 255.0 - m) / s;
    }
  }
  return out;
}

}  // namespace pcn
