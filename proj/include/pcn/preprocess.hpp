// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "pcn/tensor.hpp"

namespace pcn {

/// Center crop plus per-channel (pixel/255 - mean) / std. A single mean or
/// std entry applies to every channel.
struct PreprocessConfig {
  std::size_t crop = 224;
  std::vector<double> mean{0.485, 0.456, 0.406};
  std::vector<double> std{0.229, 0.224, 0.225};
};

/// [C,H,W] -> [C,crop,crop]; offsets floor((H - crop) / 2), floor((W - crop) / 2).
Tensor center_crop(const Tensor& image, std::size_t crop);

/// image holds pixel values in 0..255.
Tensor preprocess_frame(const Tensor& image, const PreprocessConfig& config);

}  // namespace pcn
