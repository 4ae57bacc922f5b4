// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

// Independent oracles and helpers shared by the unit and acceptance tests.
// Nothing here calls into the code under test beyond Tensor storage.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pcn/parameters.hpp"
#include "pcn/tensor.hpp"

namespace pcn::testing {

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(shape);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

/// Values bounded away from zero, for checks across relu/abs kinks.
inline Tensor random_away_from_zero(const Shape& shape, Rng& rng, double margin = 0.1) {
  std::uniform_real_distribution<double> mag(margin, 1.0);
  std::bernoulli_distribution sign(0.5);
  Tensor t(shape);
  for (double& v : t.values()) v = sign(rng) ? mag(rng) : -mag(rng);
  return t;
}

/// out[o,y,x] = bias[o] + sum input[i, y+dy-p, x+dx-p] * kernel[o,i,dy,dx].
inline Tensor conv2d_oracle(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  const std::size_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t cout = kernel.dim(0), k = kernel.dim(2);
  const long p = static_cast<long>(k / 2);
  Tensor out({cout, h, w});
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        double acc = bias[o];
        for (std::size_t i = 0; i < cin; ++i) {
          for (std::size_t dy = 0; dy < k; ++dy) {
            for (std::size_t dx = 0; dx < k; ++dx) {
              const long yy = static_cast<long>(y + dy) - p;
              const long xx = static_cast<long>(x + dx) - p;
              if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(w)) {
                continue;
              }
              acc += input[(i * h + yy) * w + xx] * kernel[((o * cin + i) * k + dy) * k + dx];
            }
          }
        }
        out[(o * h + y) * w + x] = acc;
      }
    }
  }
  return out;
}

inline Tensor linear_oracle(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  const std::size_t k = weight.dim(0), d = weight.dim(1);
  Tensor out({k});
  for (std::size_t r = 0; r < k; ++r) {
    double acc = bias[r];
    for (std::size_t c = 0; c < d; ++c) acc += weight[r * d + c] * input[c];
    out[r] = acc;
  }
  return out;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// |a - n| / max(|a|, |n|, floor), maximized over elements.
inline double max_rel_error(std::span<const double> a, std::span<const double> n,
                            double floor = 1e-8) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::max({std::abs(a[i]), std::abs(n[i]), floor});
    m = std::max(m, std::abs(a[i] - n[i]) / d);
  }
  return m;
}

inline std::vector<double> copy_values(const Tensor& t) {
  return {t.values().begin(), t.values().end()};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("pcn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace pcn::testing
