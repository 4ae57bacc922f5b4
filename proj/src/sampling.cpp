// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/sampling.hpp"

#include <string>

#include "pcn/errors.hpp"

namespace pcn {
namespace {

std::vector<std::size_t> window_from(std::size_t start, std::size_t frame_count,
                                     std::size_t window) {
  std::vector<std::size_t> idx(window);
  for (std::size_t i = 0; i < window; ++i) idx[i] = (start + i) % frame_count;
  return idx;
}

void check_counts(std::size_t frame_count, std::size_t window) {
  if (frame_count == 0) throw InputError("cannot sample a window from a clip with 0 frames");
  if (window == 0) throw InputError("window length must be >= 1");
}

void check_subsample(std::size_t window_len, std::size_t n) {
  if (n > window_len) {
    throw InputError("cannot select " + std::to_string(n) + " frames from a window of " +
                     std::to_string(window_len));
  }
}

}  // namespace

std::vector<std::size_t> sample_window(std::size_t frame_count, std::size_t window, Rng& rng) {
  check_counts(frame_count, window);
  const std::size_t max_start = frame_count >= window ? frame_count - window : frame_count - 1;
  std::uniform_int_distribution<std::size_t> start(0, max_start);
  return window_from(start(rng), frame_count, window);
}

std::vector<std::size_t> eval_window(std::size_t frame_count, std::size_t window) {
  check_counts(frame_count, window);
  const std::size_t start = frame_count >= window ? (frame_count - window) / 2 : 0;
  return window_from(start, frame_count, window);
}

std::vector<std::size_t> subsample_train(std::size_t window_len, std::size_t n, Rng& rng) {
  check_subsample(window_len, n);
  // Selection sampling: walk the window once, keeping each index with
  // probability (still needed) / (still available).
  std::vector<std::size_t> out;
  out.reserve(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < window_len && out.size() < n; ++i) {
    const double needed = static_cast<double>(n - out.size());
    const double available = static_cast<double>(window_len - i);
    if (available * unit(rng) < needed) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> subsample_eval(std::size_t window_len, std::size_t n) {
  check_subsample(window_len, n);
  std::vector<std::size_t> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = j * window_len / n;
  return out;
}

}  // namespace pcn
