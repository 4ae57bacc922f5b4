// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/parameters.hpp"

#include <algorithm>
#include <cmath>

namespace pcn {

ConvParams ConvParams::zeros(std::size_t in_channels, std::size_t out_channels, std::size_t k) {
  ConvParams p;
  p.kernel = Tensor({out_channels, in_channels, k, k});
  p.bias = Tensor({out_channels});
  p.kernel.set_requires_grad();
  p.bias.set_requires_grad();
  return p;
}

void ConvParams::init_uniform(Rng& rng, double bias_value) {
  const double fan_in = static_cast<double>(kernel.dim(1) * kernel.dim(2) * kernel.dim(3));
  const double bound = 1.0 / std::sqrt(fan_in);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : kernel.values()) v = dist(rng);
  for (double& v : bias.values()) v = bias_value;
}

void ConvParams::append_to(ParameterList& out, const std::string& prefix) const {
  out.push_back({prefix + ".kernel", kernel});
  out.push_back({prefix + ".bias", bias});
}

ParameterList sorted_by_name(ParameterList params) {
  std::sort(params.begin(), params.end(),
            [](const NamedTensor& a, const NamedTensor& b) { return a.name < b.name; });
  return params;
}

void zero_grads(ParameterList& params) {
  for (auto& p : params) p.tensor.zero_grad();
}

}  // namespace pcn
