// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "pcn/parameters.hpp"

namespace pcn {

/// Source-frame indices of a window of consecutive frames.
///
/// Clips at least `window` long get a uniformly random start in
/// [0, frame_count - window]. Shorter clips are looped from a random start:
/// index (s + i) mod frame_count.
std::vector<std::size_t> sample_window(std::size_t frame_count, std::size_t window, Rng& rng);

/// Deterministic counterpart of sample_window: centered start for long
/// clips, loop from offset 0 for short ones.
std::vector<std::size_t> eval_window(std::size_t frame_count, std::size_t window);

/// n distinct positions of [0, window_len), uniform without replacement,
/// ascending.
std::vector<std::size_t> subsample_train(std::size_t window_len, std::size_t n, Rng& rng);

/// floor(j * window_len / n) for j = 0..n-1.
std::vector<std::size_t> subsample_eval(std::size_t window_len, std::size_t n);

}  // namespace pcn
