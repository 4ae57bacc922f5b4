// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/tape.hpp"

#include <cmath>

#include "pcn/errors.hpp"

namespace pcn {

void GradientTape::record(std::string op, std::function<void()> backward) {
  if (!recording()) return;
  entries_.push_back({std::move(op), std::move(backward)});
}

void GradientTape::backward(const Tensor& loss) {
  if (entries_.empty()) throw UsageError("backward on an empty tape");
  if (!loss.defined() || loss.numel() != 1) {
    throw UsageError("backward needs a scalar loss");
  }
  if (!loss.requires_grad()) {
    throw UsageError("loss is not reachable from any recorded operation");
  }
  if (!std::isfinite(loss.item())) throw NumericError("backward on a non-finite loss");
  Tensor seed = loss;
  seed.grad()[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) it->backward();
}

}  // namespace pcn
