// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pcn {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major float64 array with an optional gradient buffer.
///
/// A Tensor is a handle: copies share storage, which is what lets the
/// gradient tape accumulate into the same buffer from several uses. Use
/// clone() for an independent copy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<double> values();
  std::span<const double> values() const;
  double* data() { return values().data(); }
  const double* data() const { return values().data(); }
  double& operator[](std::size_t i) { return values()[i]; }
  double operator[](std::size_t i) const { return values()[i]; }
  /// Value of a single-element tensor.
  double item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on = true);

  bool has_grad() const;
  /// Gradient buffer, allocated as zeros on first access.
  std::span<double> grad();
  std::span<const double> grad() const;
  void zero_grad();

  /// Deep copy of the values; the copy does not require grad.
  Tensor clone() const;
  bool is_same(const Tensor& other) const { return storage_ == other.storage_; }

  bool all_finite() const;

 private:
  struct Storage {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> storage_;
};

}  // namespace pcn
