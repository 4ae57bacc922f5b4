// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pcn/errors.hpp"

namespace pcn {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw ConfigError("tensor shape must have at least one dimension");
  for (std::size_t d : shape) {
    if (d == 0) throw ConfigError("tensor dimension of size 0 in " + shape_to_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) {
  check_shape(shape);
  storage_ = std::make_shared<Storage>();
  storage_->values.assign(shape_numel(shape), fill);
  storage_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> values) {
  check_shape(shape);
  if (shape_numel(shape) != values.size()) {
    throw ConfigError("shape " + shape_to_string(shape) + " does not match " +
                      std::to_string(values.size()) + " values");
  }
  storage_ = std::make_shared<Storage>();
  storage_->shape = std::move(shape);
  storage_->values = std::move(values);
}

Tensor Tensor::scalar(double value) { return Tensor({1}, value); }

const Shape& Tensor::shape() const {
  if (!storage_) throw UsageError("access to an undefined tensor");
  return storage_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) throw UsageError("axis out of range for shape " + shape_to_string(s));
  return s[axis];
}

std::size_t Tensor::numel() const { return shape_numel(shape()); }

std::span<double> Tensor::values() {
  if (!storage_) throw UsageError("access to an undefined tensor");
  return storage_->values;
}

std::span<const double> Tensor::values() const {
  if (!storage_) throw UsageError("access to an undefined tensor");
  return storage_->values;
}

double Tensor::item() const {
  if (numel() != 1) throw UsageError("item() on tensor of shape " + shape_to_string(shape()));
  return storage_->values[0];
}

bool Tensor::requires_grad() const { return storage_ && storage_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  if (!storage_) throw UsageError("set_requires_grad on an undefined tensor");
  storage_->requires_grad = on;
  return *this;
}

bool Tensor::has_grad() const { return storage_ && !storage_->grad.empty(); }

std::span<double> Tensor::grad() {
  if (!storage_) throw UsageError("grad() on an undefined tensor");
  if (storage_->grad.empty()) storage_->grad.assign(storage_->values.size(), 0.0);
  return storage_->grad;
}

std::span<const double> Tensor::grad() const {
  if (!storage_) throw UsageError("grad() on an undefined tensor");
  if (storage_->grad.empty()) storage_->grad.assign(storage_->values.size(), 0.0);
  return storage_->grad;
}

void Tensor::zero_grad() {
  if (storage_ && !storage_->grad.empty()) {
    std::fill(storage_->grad.begin(), storage_->grad.end(), 0.0);
  }
}

Tensor Tensor::clone() const {
  if (!storage_) return {};
  return Tensor(storage_->shape, storage_->values);
}

bool Tensor::all_finite() const {
  const auto v = values();
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace pcn
