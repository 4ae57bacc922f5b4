// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "pcn/tensor.hpp"

namespace pcn {

using Rng = std::mt19937_64;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Handles to a model's trainable tensors, keyed by dotted names.
using ParameterList = std::vector<NamedTensor>;

/// Convolution weights: kernel [C_out, C_in, k, k] and bias [C_out].
struct ConvParams {
  Tensor kernel;
  Tensor bias;

  static ConvParams zeros(std::size_t in_channels, std::size_t out_channels, std::size_t k);

  /// Kernel uniform in +-1/sqrt(fan_in), bias set to bias_value.
  void init_uniform(Rng& rng, double bias_value = 0.0);
  void append_to(ParameterList& out, const std::string& prefix) const;
};

/// Sorted-by-name copy; the canonical order used by checkpoints.
ParameterList sorted_by_name(ParameterList params);

void zero_grads(ParameterList& params);

}  // namespace pcn
