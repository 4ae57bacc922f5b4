// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "pcn/errors.hpp"

namespace pcn::ops {
namespace {

bool tracks(const GradientTape& tape, std::initializer_list<const Tensor*> inputs) {
  if (!tape.recording()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ConfigError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                      " vs " + shape_to_string(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw ConfigError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                      shape_to_string(t.shape()));
  }
}

// Shared plumbing for elementwise unary ops whose derivative is a function
// of the input and output values.
template <typename Fwd, typename Deriv>
Tensor unary(GradientTape& tape, const char* name, const Tensor& x, Fwd fwd, Deriv deriv) {
  Tensor out(x.shape());
  const auto xv = x.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < xv.size(); ++i) ov[i] = fwd(xv[i]);
  if (tracks(tape, {&x})) {
    out.set_requires_grad();
    tape.record(name, [x = Tensor(x), out, deriv]() mutable {
      if (!out.has_grad()) return;
      const auto go = std::as_const(out).grad();
      const auto xv = std::as_const(x).values();
      const auto ov = std::as_const(out).values();
      auto gx = x.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * deriv(xv[i], ov[i]);
    });
  }
  return out;
}

}  // namespace

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

Eigen::Index to_index(std::size_t n) { return static_cast<Eigen::Index>(n); }

// Unrolls every k x k neighborhood into a column: patches[(c*k + ky)*k + kx][y*W + x]
// holds input[c, y+ky-p, x+kx-p], zero outside the image.
std::vector<double> im2col(const double* in, std::size_t cin, std::size_t h, std::size_t w,
                           std::size_t k) {
  const long pad = static_cast<long>(k / 2);
  const long H = static_cast<long>(h), W = static_cast<long>(w);
  const std::size_t plane = h * w;
  std::vector<double> patches(cin * k * k * plane, 0.0);
  for (std::size_t c = 0; c < cin; ++c) {
    const double* src = in + c * plane;
    for (long ky = 0; ky < static_cast<long>(k); ++ky) {
      const long dy = ky - pad;
      const long y0 = std::max(0L, -dy), y1 = std::min(H, H - dy);
      for (long kx = 0; kx < static_cast<long>(k); ++kx) {
        const long dx = kx - pad;
        const long x0 = std::max(0L, -dx), x1 = std::min(W, W - dx);
        double* row = patches.data() + ((c * k + static_cast<std::size_t>(ky)) * k +
                                        static_cast<std::size_t>(kx)) * plane;
        for (long y = y0; y < y1; ++y) {
          for (long x = x0; x < x1; ++x) row[y * W + x] = src[(y + dy) * W + x + dx];
        }
      }
    }
  }
  return patches;
}

// Adjoint of im2col: scatters column gradients back onto the input image.
void col2im_add(const double* patches, double* in, std::size_t cin, std::size_t h, std::size_t w,
                std::size_t k) {
  const long pad = static_cast<long>(k / 2);
  const long H = static_cast<long>(h), W = static_cast<long>(w);
  const std::size_t plane = h * w;
  for (std::size_t c = 0; c < cin; ++c) {
    double* dst = in + c * plane;
    for (long ky = 0; ky < static_cast<long>(k); ++ky) {
      const long dy = ky - pad;
      const long y0 = std::max(0L, -dy), y1 = std::min(H, H - dy);
      for (long kx = 0; kx < static_cast<long>(k); ++kx) {
        const long dx = kx - pad;
        const long x0 = std::max(0L, -dx), x1 = std::min(W, W - dx);
        const double* row = patches + ((c * k + static_cast<std::size_t>(ky)) * k +
                                       static_cast<std::size_t>(kx)) * plane;
        for (long y = y0; y < y1; ++y) {
          for (long x = x0; x < x1; ++x) dst[(y + dy) * W + x + dx] += row[y * W + x];
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(GradientTape& tape, const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  require_rank("conv2d input", input, 3);
  require_rank("conv2d kernel", kernel, 4);
  const std::size_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t cout = kernel.dim(0), k = kernel.dim(2);
  if (kernel.dim(1) != cin) {
    throw ConfigError("conv2d: kernel " + shape_to_string(kernel.shape()) +
                      " expects " + std::to_string(kernel.dim(1)) + " input channels, input is " +
                      shape_to_string(input.shape()));
  }
  if (kernel.dim(3) != k || k % 2 == 0) {
    throw ConfigError("conv2d: kernel must be square with odd size, got " +
                      shape_to_string(kernel.shape()));
  }
  if (bias.shape() != Shape{cout}) {
    throw ConfigError("conv2d: bias " + shape_to_string(bias.shape()) + " for kernel " +
                      shape_to_string(kernel.shape()));
  }
  const std::size_t plane = h * w;
  const std::size_t cols = cin * k * k;
  auto patches = std::make_shared<const std::vector<double>>(im2col(input.data(), cin, h, w, k));

  // out[o, :] = bias[o] + sum_j kernel[o, j] * patches[j, :]
  Tensor out({cout, h, w});
  {
    MatMap o(out.data(), to_index(cout), to_index(plane));
    o.noalias() = ConstMatMap(kernel.data(), to_index(cout), to_index(cols)) *
                  ConstMatMap(patches->data(), to_index(cols), to_index(plane));
    for (std::size_t oc = 0; oc < cout; ++oc) o.row(to_index(oc)).array() += bias[oc];
  }

  if (tracks(tape, {&input, &kernel, &bias})) {
    out.set_requires_grad();
    tape.record("conv2d", [input = Tensor(input), kernel = Tensor(kernel), bias = Tensor(bias), out,
                           patches, cin, cout, k, h, w, plane, cols]() mutable {
      if (!out.has_grad()) return;
      const double* go = std::as_const(out).grad().data();
      if (bias.requires_grad()) {
        auto gb = bias.grad();
        for (std::size_t oc = 0; oc < cout; ++oc) {
          double s = 0.0;
          for (std::size_t q = 0; q < plane; ++q) s += go[oc * plane + q];
          gb[oc] += s;
        }
      }
      const ConstMatMap g(go, to_index(cout), to_index(plane));
      if (kernel.requires_grad()) {
        MatMap gk(kernel.grad().data(), to_index(cout), to_index(cols));
        gk.noalias() += g * ConstMatMap(patches->data(), to_index(cols), to_index(plane)).transpose();
      }
      if (input.requires_grad()) {
        Mat gpatches = ConstMatMap(std::as_const(kernel).data(), to_index(cout), to_index(cols)).transpose() * g;
        col2im_add(gpatches.data(), input.grad().data(), cin, h, w, k);
      }
    });
  }
  return out;
}

Tensor global_max_pool(GradientTape& tape, const Tensor& input) {
  require_rank("global_max_pool", input, 3);
  const std::size_t c = input.dim(0), plane = input.dim(1) * input.dim(2);
  Tensor out({c});
  std::vector<std::size_t> argmax(c);
  const double* in = input.data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < plane; ++j) {
      if (in[ch * plane + j] > in[ch * plane + best]) best = j;
    }
    argmax[ch] = ch * plane + best;
    out[ch] = in[argmax[ch]];
  }
  if (tracks(tape, {&input})) {
    out.set_requires_grad();
    tape.record("global_max_pool", [input = Tensor(input), out, argmax = std::move(argmax)]() mutable {
      if (!out.has_grad()) return;
      const auto go = std::as_const(out).grad();
      auto gi = input.grad();
      for (std::size_t ch = 0; ch < argmax.size(); ++ch) gi[argmax[ch]] += go[ch];
    });
  }
  return out;
}

Tensor max_pool2(GradientTape& tape, const Tensor& input) {
  require_rank("max_pool2", input, 3);
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (h < 2 || w < 2) {
    throw ConfigError("max_pool2: input too small " + shape_to_string(input.shape()));
  }
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor out({c, oh, ow});
  std::vector<std::size_t> argmax(out.numel());
  const double* in = input.data();
  std::size_t o = 0;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x, ++o) {
        const std::size_t base = ch * h * w + 2 * y * w + 2 * x;
        const std::size_t cand[4] = {base, base + 1, base + w, base + w + 1};
        std::size_t best = cand[0];
        for (int j = 1; j < 4; ++j) {
          if (in[cand[j]] > in[best]) best = cand[j];
        }
        argmax[o] = best;
        out[o] = in[best];
      }
    }
  }
  if (tracks(tape, {&input})) {
    out.set_requires_grad();
    tape.record("max_pool2", [input = Tensor(input), out, argmax = std::move(argmax)]() mutable {
      if (!out.has_grad()) return;
      const auto go = std::as_const(out).grad();
      auto gi = input.grad();
      for (std::size_t j = 0; j < argmax.size(); ++j) gi[argmax[j]] += go[j];
    });
  }
  return out;
}

Tensor linear(GradientTape& tape, const Tensor& input, const Tensor& weight, const Tensor& bias) {
  require_rank("linear input", input, 1);
  require_rank("linear weight", weight, 2);
  const std::size_t d = input.dim(0), k = weight.dim(0);
  if (weight.dim(1) != d) {
    throw ConfigError("linear: weight " + shape_to_string(weight.shape()) + " vs input " +
                      shape_to_string(input.shape()));
  }
  if (bias.shape() != Shape{k}) {
    throw ConfigError("linear: bias " + shape_to_string(bias.shape()) + " vs weight " +
                      shape_to_string(weight.shape()));
  }
  Tensor out({k});
  const double* x = input.data();
  const double* wt = weight.data();
  for (std::size_t r = 0; r < k; ++r) {
    double s = bias[r];
    for (std::size_t j = 0; j < d; ++j) s += wt[r * d + j] * x[j];
    out[r] = s;
  }
  if (tracks(tape, {&input, &weight, &bias})) {
    out.set_requires_grad();
    tape.record("linear", [input = Tensor(input), weight = Tensor(weight), bias = Tensor(bias), out, d, k]() mutable {
      if (!out.has_grad()) return;
      const auto go = std::as_const(out).grad();
      if (bias.requires_grad()) {
        auto gb = bias.grad();
        for (std::size_t r = 0; r < k; ++r) gb[r] += go[r];
      }
      if (weight.requires_grad()) {
        auto gw = weight.grad();
        const auto x = std::as_const(input).values();
        for (std::size_t r = 0; r < k; ++r) {
          for (std::size_t j = 0; j < d; ++j) gw[r * d + j] += go[r] * x[j];
        }
      }
      if (input.requires_grad()) {
        auto gx = input.grad();
        const auto wt = std::as_const(weight).values();
        for (std::size_t r = 0; r < k; ++r) {
          for (std::size_t j = 0; j < d; ++j) gx[j] += go[r] * wt[r * d + j];
        }
      }
    });
  }
  return out;
}

Tensor relu(GradientTape& tape, const Tensor& x) {
  return unary(
      tape, "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(GradientTape& tape, const Tensor& x) {
  return unary(
      tape, "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(GradientTape& tape, const Tensor& x) {
  return unary(
      tape, "tanh", x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor abs(GradientTape& tape, const Tensor& x) {
  return unary(
      tape, "abs", x, [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

namespace {

template <typename Fwd>
Tensor binary(GradientTape& tape, const char* name, const Tensor& a, const Tensor& b, Fwd fwd,
              double sign_b, bool product) {
  require_same_shape(name, a, b);
  Tensor out(a.shape());
  const auto av = a.values();
  const auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = fwd(av[i], bv[i]);
  if (tracks(tape, {&a, &b})) {
    out.set_requires_grad();
    tape.record(name, [a = Tensor(a), b = Tensor(b), out, sign_b, product]() mutable {
      if (!out.has_grad()) return;
      const auto go = std::as_const(out).grad();
      if (a.requires_grad()) {
        const auto bv = std::as_const(b).values();
        auto ga = a.grad();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += product ? go[i] * bv[i] : go[i];
      }
      if (b.requires_grad()) {
        const auto av = std::as_const(a).values();
        auto gb = b.grad();
        for (std::size_t i = 0; i < gb.size(); ++i) {
          gb[i] += product ? go[i] * av[i] : sign_b * go[i];
        }
      }
    });
  }
  return out;
}

}  // namespace

Tensor add(GradientTape& tape, const Tensor& a, const Tensor& b) {
  return binary(tape, "add", a, b, [](double x, double y) { return x + y; }, 1.0, false);
}

Tensor sub(GradientTape& tape, const Tensor& a, const Tensor& b) {
  return binary(tape, "sub", a, b, [](double x, double y) { return x - y; }, -1.0, false);
}

Tensor hadamard(GradientTape& tape, const Tensor& a, const Tensor& b) {
  return binary(tape, "hadamard", a, b, [](double x, double y) { return x * y; }, 1.0, true);
}

Tensor scale(GradientTape& tape, const Tensor& x, double factor) {
  return unary(
      tape, "scale", x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor channel_concat(GradientTape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw UsageError("channel_concat of an empty list");
  Shape tail(parts[0].shape().begin() + 1, parts[0].shape().end());
  std::size_t channels = 0;
  bool any_grad = false;
  for (const Tensor& p : parts) {
    Shape ptail(p.shape().begin() + 1, p.shape().end());
    if (ptail != tail) {
      throw ConfigError("channel_concat: trailing dims differ, " +
                        shape_to_string(parts[0].shape()) + " vs " + shape_to_string(p.shape()));
    }
    channels += p.dim(0);
    any_grad = any_grad || p.requires_grad();
  }
  Shape shape{channels};
  shape.insert(shape.end(), tail.begin(), tail.end());
  Tensor out(shape);
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const auto pv = p.values();
    std::copy(pv.begin(), pv.end(), out.values().begin() + static_cast<long>(offset));
    offset += pv.size();
  }
  if (tape.recording() && any_grad) {
    out.set_requires_grad();
    std::vector<Tensor> saved(parts.begin(), parts.end());
    tape.record("channel_concat", [saved = std::move(saved), out]() mutable {
      if (!out.has_grad()) return;
      const auto go = std::as_const(out).grad();
      std::size_t offset = 0;
      for (Tensor& p : saved) {
        const std::size_t n = p.numel();
        if (p.requires_grad()) {
          auto gp = p.grad();
          for (std::size_t i = 0; i < n; ++i) gp[i] += go[offset + i];
        }
        offset += n;
      }
    });
  }
  return out;
}

Tensor sum(GradientTape& tape, const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  Tensor out = Tensor::scalar(s);
  if (tracks(tape, {&x})) {
    out.set_requires_grad();
    tape.record("sum", [x = Tensor(x), out]() mutable {
      if (!out.has_grad()) return;
      const double g = std::as_const(out).grad()[0];
      for (double& gx : x.grad()) gx += g;
    });
  }
  return out;
}

Tensor mean(GradientTape& tape, const Tensor& x) {
  const double n = static_cast<double>(x.numel());
  double s = 0.0;
  for (double v : x.values()) s += v;
  Tensor out = Tensor::scalar(s / n);
  if (tracks(tape, {&x})) {
    out.set_requires_grad();
    tape.record("mean", [x = Tensor(x), out, n]() mutable {
      if (!out.has_grad()) return;
      const double g = std::as_const(out).grad()[0] / n;
      for (double& gx : x.grad()) gx += g;
    });
  }
  return out;
}

Tensor mean_of(GradientTape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw UsageError("mean of an empty list");
  const Shape& shape = parts[0].shape();
  bool any_grad = false;
  for (const Tensor& p : parts) {
    require_same_shape("mean_of", parts[0], p);
    any_grad = any_grad || p.requires_grad();
  }
  const double n = static_cast<double>(parts.size());
  Tensor out(shape);
  std::vector<double> column(parts.size());
  for (std::size_t i = 0; i < out.numel(); ++i) {
    for (std::size_t j = 0; j < parts.size(); ++j) column[j] = parts[j][i];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (double v : column) s += v;
    out[i] = s / n;
  }
  if (tape.recording() && any_grad) {
    out.set_requires_grad();
    std::vector<Tensor> saved(parts.begin(), parts.end());
    tape.record("mean_of", [saved = std::move(saved), out, n]() mutable {
      if (!out.has_grad()) return;
      const auto go = std::as_const(out).grad();
      for (Tensor& p : saved) {
        if (!p.requires_grad()) continue;
        auto gp = p.grad();
        for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += go[i] / n;
      }
    });
  }
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double m = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& v : p) {
    v = std::exp(v - m);
    z += v;
  }
  for (double& v : p) v /= z;
  return p;
}

Tensor softmax_cross_entropy(GradientTape& tape, const Tensor& logits, std::size_t label) {
  require_rank("softmax_cross_entropy", logits, 1);
  const std::size_t k = logits.dim(0);
  if (label >= k) {
    throw InputError("label " + std::to_string(label) + " out of range for " + std::to_string(k) +
                     " classes");
  }
  const auto lv = logits.values();
  const double m = *std::max_element(lv.begin(), lv.end());
  double z = 0.0;
  for (double v : lv) z += std::exp(v - m);
  const double log_z = m + std::log(z);
  Tensor out = Tensor::scalar(log_z - lv[label]);
  if (tracks(tape, {&logits})) {
    out.set_requires_grad();
    tape.record("softmax_cross_entropy", [logits = Tensor(logits), out, label, log_z]() mutable {
      if (!out.has_grad()) return;
      const double g = std::as_const(out).grad()[0];
      const auto lv = std::as_const(logits).values();
      auto gl = logits.grad();
      for (std::size_t i = 0; i < gl.size(); ++i) {
        const double p = std::exp(lv[i] - log_z);
        gl[i] += g * (p - (i == label ? 1.0 : 0.0));
      }
    });
  }
  return out;
}

}  // namespace pcn::ops

namespace pcn {

Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, Tensor x,
                                  double h) {
  Tensor g(x.shape());
  auto xv = x.values();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double orig = xv[i];
    xv[i] = orig + h;
    const double plus = f(x);
    xv[i] = orig - h;
    const double minus = f(x);
    xv[i] = orig;
    g[i] = (plus - minus) / (2.0 * h);
  }
  return g;
}

}  // namespace pcn
