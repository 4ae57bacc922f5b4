// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pcn/tensor.hpp"

namespace pcn {

/// Ordered record of executed operations for reverse-mode differentiation.
///
/// Each entry holds a closure that owns the intermediates its backward
/// needs. backward() replays entries in exact reverse order. A tape is
/// single-writer; give each thread its own.
class GradientTape {
 public:
  enum class Mode { kRecord, kInference };

  explicit GradientTape(Mode mode = Mode::kRecord) : mode_(mode) {}

  bool recording() const { return mode_ == Mode::kRecord; }

  void record(std::string op, std::function<void()> backward);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::string& op_name(std::size_t i) const { return entries_.at(i).op; }

  /// Seeds d(loss)/d(loss) = 1 and propagates into every tensor that
  /// requires grad. Gradients accumulate; callers zero them between steps.
  void backward(const Tensor& loss);

  void clear() { entries_.clear(); }

 private:
  struct Entry {
    std::string op;
    std::function<void()> backward;
  };
  Mode mode_;
  std::vector<Entry> entries_;
};

}  // namespace pcn
