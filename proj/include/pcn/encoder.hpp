// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "pcn/parameters.hpp"
#include "pcn/tape.hpp"
#include "pcn/tensor.hpp"

namespace pcn {

/// Two (conv -> relu -> 2x max-pool) stages mapping an image to [C0,H,W].
/// The input image must be 4H x 4W.
struct EncoderConfig {
  std::size_t in_channels = 1;
  std::size_t hidden_channels = 8;
  std::size_t out_channels = 8;
  std::size_t out_height = 8;
  std::size_t out_width = 8;
  std::size_t kernel_size = 3;
  /// When false the weights never receive gradients ("fixed weight").
  bool trainable = true;

  std::size_t in_height() const { return 4 * out_height; }
  std::size_t in_width() const { return 4 * out_width; }
};

class FrameEncoder {
 public:
  explicit FrameEncoder(EncoderConfig config);

  void init(Rng& rng);
  const EncoderConfig& config() const { return config_; }
  ParameterList parameters(const std::string& prefix = "encoder") const;

  Tensor encode(GradientTape& tape, const Tensor& image) const;

  ConvParams& conv1() { return conv1_; }
  ConvParams& conv2() { return conv2_; }

 private:
  EncoderConfig config_;
  ConvParams conv1_;
  ConvParams conv2_;
};

}  // namespace pcn
