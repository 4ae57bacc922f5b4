// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pcn/tape.hpp"
#include "pcn/tensor.hpp"

/// Differentiable operations. Each takes the tape to record on; outputs
/// require grad iff the tape is recording and some input requires grad.
/// All operations are pure in their inputs.
namespace pcn::ops {

/// Stride-1, zero "same" padded 2-D convolution.
/// input [C_in,H,W], kernel [C_out,C_in,k,k] with k odd, bias [C_out].
Tensor conv2d(GradientTape& tape, const Tensor& input, const Tensor& kernel, const Tensor& bias);

/// [C,H,W] -> [C]. Ties route the gradient to the first row-major argmax.
Tensor global_max_pool(GradientTape& tape, const Tensor& input);

/// 2x2 window, stride 2: [C,H,W] -> [C,H/2,W/2] (floor). First-argmax ties.
Tensor max_pool2(GradientTape& tape, const Tensor& input);

/// input [D], weight [K,D], bias [K] -> [K].
Tensor linear(GradientTape& tape, const Tensor& input, const Tensor& weight, const Tensor& bias);

Tensor relu(GradientTape& tape, const Tensor& x);
Tensor sigmoid(GradientTape& tape, const Tensor& x);
Tensor tanh(GradientTape& tape, const Tensor& x);
Tensor abs(GradientTape& tape, const Tensor& x);

Tensor add(GradientTape& tape, const Tensor& a, const Tensor& b);
Tensor sub(GradientTape& tape, const Tensor& a, const Tensor& b);
Tensor hadamard(GradientTape& tape, const Tensor& a, const Tensor& b);
Tensor scale(GradientTape& tape, const Tensor& x, double factor);

/// Stacks along axis 0; trailing dimensions must agree.
Tensor channel_concat(GradientTape& tape, std::span<const Tensor> parts);

/// Scalar reductions, shape [1].
Tensor sum(GradientTape& tape, const Tensor& x);
Tensor mean(GradientTape& tape, const Tensor& x);

/// Elementwise arithmetic mean of equally shaped tensors. Each element is
/// summed in sorted order, so permuting the inputs is bit-identical.
Tensor mean_of(GradientTape& tape, std::span<const Tensor> parts);

/// -log softmax(logits)[label], max-subtracted. Shape [1].
Tensor softmax_cross_entropy(GradientTape& tape, const Tensor& logits, std::size_t label);

/// Plain softmax probabilities (no tape).
std::vector<double> softmax(std::span<const double> logits);

}  // namespace pcn::ops

namespace pcn {

/// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h for every element of x.
/// x is perturbed in place and restored before returning.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, Tensor x,
                                  double h);

}  // namespace pcn
