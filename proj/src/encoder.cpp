// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/encoder.hpp"

#include "pcn/errors.hpp"
#include "pcn/ops.hpp"

namespace pcn {

FrameEncoder::FrameEncoder(EncoderConfig config) : config_(config) {
  if (config_.in_channels < 1 || config_.hidden_channels < 1 || config_.out_channels < 1 ||
      config_.out_height < 1 || config_.out_width < 1 || config_.kernel_size % 2 == 0) {
    throw ConfigError("invalid encoder configuration");
  }
  conv1_ = ConvParams::zeros(config_.in_channels, config_.hidden_channels, config_.kernel_size);
  conv2_ = ConvParams::zeros(config_.hidden_channels, config_.out_channels, config_.kernel_size);
  for (ConvParams* c : {&conv1_, &conv2_}) {
    c->kernel.set_requires_grad(config_.trainable);
    c->bias.set_requires_grad(config_.trainable);
  }
}

void FrameEncoder::init(Rng& rng) {
  conv1_.init_uniform(rng);
  conv2_.init_uniform(rng);
}

ParameterList FrameEncoder::parameters(const std::string& prefix) const {
  ParameterList out;
  conv1_.append_to(out, prefix + ".conv1");
  conv2_.append_to(out, prefix + ".conv2");
  return out;
}

Tensor FrameEncoder::encode(GradientTape& tape, const Tensor& image) const {
  const Shape expected{config_.in_channels, config_.in_height(), config_.in_width()};
  if (image.shape() != expected) {
    throw ConfigError("encoder expects images of " + shape_to_string(expected) + ", got " +
                      shape_to_string(image.shape()));
  }
  Tensor x = ops::relu(tape, ops::conv2d(tape, image, conv1_.kernel, conv1_.bias));
  x = ops::max_pool2(tape, x);
  x = ops::relu(tape, ops::conv2d(tape, x, conv2_.kernel, conv2_.bias));
  return ops::max_pool2(tape, x);
}

}  // namespace pcn
