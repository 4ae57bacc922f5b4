// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "pcn/errors.hpp"
#include "pcn/ops.hpp"
#include "pcn/tape.hpp"
#include "pcn/tensor.hpp"
#include "test_support.hpp"

namespace pcn {
namespace {

using testing::conv2d_oracle;
using testing::max_abs_diff;
using testing::max_rel_error;
using testing::random_away_from_zero;
using testing::random_tensor;

using Builder = std::function<Tensor(GradientTape&, std::vector<Tensor>&)>;

// Analytic gradient of sum(op(inputs) * probe) against central differences,
// for every input. Returns the worst relative error.
double gradient_error(const Builder& op, std::vector<Tensor> inputs, Rng& rng, double h = 1e-5) {
  Tensor probe;
  {
    GradientTape tape(GradientTape::Mode::kInference);
    probe = random_tensor(op(tape, inputs).shape(), rng);
  }
  for (auto& x : inputs) {
    x.set_requires_grad(true);
    x.zero_grad();
  }
  GradientTape tape;
  const Tensor loss = ops::sum(tape, ops::hadamard(tape, op(tape, inputs), probe));
  tape.backward(loss);

  double worst = 0.0;
  for (auto& x : inputs) {
    const std::vector<double> analytic(x.grad().begin(), x.grad().end());
    const Tensor numeric = finite_difference_gradient(
        [&](const Tensor&) {
          GradientTape t(GradientTape::Mode::kInference);
          return ops::sum(t, ops::hadamard(t, op(t, inputs), probe)).item();
        },
        x, h);
    worst = std::max(worst, max_rel_error(analytic, numeric.values(), 1e-6));
  }
  return worst;
}

TEST(Tensor, ShapeInvariants) {
  EXPECT_THROW(Tensor(Shape{}), ConfigError);
  EXPECT_THROW(Tensor(Shape{2, 0}), ConfigError);
  EXPECT_THROW(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), ConfigError);
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.dim(1), 3u);
  EXPECT_THROW(t.item(), UsageError);
  EXPECT_DOUBLE_EQ(Tensor::scalar(4.0).item(), 4.0);
}

TEST(Tensor, HandlesShareStorageAndCloneDoesNot) {
  Tensor a({3}, 1.0);
  Tensor alias = a;
  Tensor copy = a.clone();
  alias[0] = 7.0;
  EXPECT_EQ(a[0], 7.0);
  EXPECT_EQ(copy[0], 1.0);
  EXPECT_TRUE(a.is_same(alias));
  EXPECT_FALSE(a.is_same(copy));
}

TEST(Tensor, FiniteCheck) {
  Tensor t({2}, 0.0);
  EXPECT_TRUE(t.all_finite());
  t[1] = std::nan("");
  EXPECT_FALSE(t.all_finite());
}

TEST(Tape, BackwardOnEmptyTapeIsUsageError) {
  GradientTape tape;
  EXPECT_THROW(tape.backward(Tensor::scalar(1.0)), UsageError);
}

TEST(Tape, RejectsNonScalarAndUnreachableLoss) {
  GradientTape tape;
  Tensor x({3}, 1.0);
  x.set_requires_grad(true);
  const Tensor y = ops::relu(tape, x);
  EXPECT_THROW(tape.backward(y), UsageError);
  EXPECT_THROW(tape.backward(Tensor::scalar(2.0)), UsageError);
}

TEST(Tape, NonFiniteLossIsNumericError) {
  GradientTape tape;
  Tensor x({1}, std::numeric_limits<double>::infinity());
  x.set_requires_grad(true);
  EXPECT_THROW(tape.backward(ops::sum(tape, x)), NumericError);
}

TEST(Tape, BackwardVisitsEntriesInReverseOrder) {
  GradientTape tape;
  std::vector<int> visited;
  Tensor x({1}, 1.0);
  x.set_requires_grad(true);
  for (int i = 0; i < 5; ++i) {
    tape.record("probe" + std::to_string(i), [&visited, i] { visited.push_back(i); });
  }
  const Tensor loss = ops::sum(tape, x);
  tape.backward(loss);
  EXPECT_EQ(visited, (std::vector<int>{4, 3, 2, 1, 0}));
  EXPECT_EQ(tape.op_name(0), "probe0");
}

TEST(Tape, RecordsOpsInExecutionOrder) {
  GradientTape tape;
  Tensor x({2}, 1.0);
  x.set_requires_grad(true);
  const Tensor y = ops::tanh(tape, ops::relu(tape, x));
  ops::sum(tape, y);
  ASSERT_EQ(tape.size(), 3u);
  EXPECT_EQ(tape.op_name(0), "relu");
  EXPECT_EQ(tape.op_name(1), "tanh");
  EXPECT_EQ(tape.op_name(2), "sum");
}

TEST(Tape, InferenceModeRecordsNothing) {
  GradientTape tape(GradientTape::Mode::kInference);
  Tensor x({2}, 1.0);
  x.set_requires_grad(true);
  const Tensor y = ops::sum(tape, ops::relu(tape, x));
  EXPECT_TRUE(tape.empty());
  EXPECT_FALSE(y.requires_grad());
}

TEST(Backward, SumGivesOnes) {
  GradientTape tape;
  Tensor x({2, 3}, 0.3);
  x.set_requires_grad(true);
  tape.backward(ops::sum(tape, x));
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, FanOutAccumulates) {
  Rng rng(3);
  Tensor x = random_tensor({4, 2}, rng);
  x.set_requires_grad(true);
  {
    GradientTape tape;
    tape.backward(ops::sum(tape, ops::add(tape, x, x)));
  }
  const std::vector<double> twice(x.grad().begin(), x.grad().end());
  x.zero_grad();
  {
    GradientTape tape;
    tape.backward(ops::sum(tape, x));
  }
  for (std::size_t i = 0; i < twice.size(); ++i) {
    EXPECT_EQ(twice[i], 2.0);
    EXPECT_EQ(twice[i], 2.0 * x.grad()[i]);
  }
}

TEST(FiniteDifference, SumOfSquares) {
  Tensor x({2}, std::vector<double>{1.0, 2.0});
  const Tensor g = finite_difference_gradient(
      [](const Tensor& t) { return t[0] * t[0] + t[1] * t[1]; }, x, 1e-5);
  EXPECT_NEAR(g[0], 2.0, 1e-8);
  EXPECT_NEAR(g[1], 4.0, 1e-8);
  EXPECT_EQ(x[0], 1.0);
  EXPECT_EQ(x[1], 2.0);
}

TEST(FiniteDifference, ConstantFunctionHasZeroGradient) {
  Tensor x({3}, 0.5);
  const Tensor g = finite_difference_gradient([](const Tensor&) { return 3.0; }, x, 1e-5);
  for (double v : g.values()) EXPECT_EQ(v, 0.0);
}

TEST(FiniteDifference, AgreesWithBackwardOnConvReluLinearChain) {
  Rng rng(11);
  std::vector<Tensor> in{random_tensor({2, 5, 5}, rng), random_tensor({3, 2, 3, 3}, rng),
                         random_tensor({3}, rng), random_tensor({4, 3}, rng),
                         random_tensor({4}, rng)};
  const Builder chain = [](GradientTape& t, std::vector<Tensor>& v) {
    const Tensor c = ops::relu(t, ops::conv2d(t, v[0], v[1], v[2]));
    return ops::linear(t, ops::global_max_pool(t, c), v[3], v[4]);
  };
  EXPECT_LE(gradient_error(chain, in, rng), 1e-6);
}

TEST(Conv2d, AllOnesCountsNeighbours) {
  GradientTape tape;
  const Tensor out = ops::conv2d(tape, Tensor({1, 3, 3}, 1.0), Tensor({1, 1, 3, 3}, 1.0),
                                 Tensor({1}, 0.0));
  EXPECT_EQ(out[4], 9.0);
  EXPECT_EQ(out[0], 4.0);
  EXPECT_EQ(out[2], 4.0);
  EXPECT_EQ(out[6], 4.0);
  EXPECT_EQ(out[8], 4.0);
  EXPECT_EQ(out[1], 6.0);
}

TEST(Conv2d, DeltaKernelIsIdentity) {
  Rng rng(5);
  const Tensor x = random_tensor({3, 6, 4}, rng);
  Tensor k({3, 3, 3, 3}, 0.0);
  for (std::size_t c = 0; c < 3; ++c) k[((c * 3 + c) * 3 + 1) * 3 + 1] = 1.0;
  GradientTape tape;
  const Tensor out = ops::conv2d(tape, x, k, Tensor({3}, 0.0));
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(out[i], x[i]);
}

TEST(Conv2d, MatchesNestedLoopOracle) {
  Rng rng(2026);
  std::uniform_int_distribution<std::size_t> ch(1, 4), sp(1, 8), kk(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t cin = ch(rng), cout = ch(rng), h = sp(rng), w = sp(rng);
    const std::size_t k = kk(rng) ? 3 : 1;
    const Tensor x = random_tensor({cin, h, w}, rng);
    const Tensor kernel = random_tensor({cout, cin, k, k}, rng);
    const Tensor bias = random_tensor({cout}, rng);
    GradientTape tape;
    const Tensor out = ops::conv2d(tape, x, kernel, bias);
    ASSERT_EQ(out.shape(), (Shape{cout, h, w}));
    EXPECT_LE(max_abs_diff(out, conv2d_oracle(x, kernel, bias)), 1e-12) << "trial " << trial;
  }
}

TEST(Conv2d, ChannelMismatchNamesBothShapes) {
  GradientTape tape;
  try {
    ops::conv2d(tape, Tensor({2, 4, 4}), Tensor({1, 3, 3, 3}), Tensor({1}));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2,4,4]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[1,3,3,3]"), std::string::npos) << msg;
  }
  EXPECT_THROW(ops::conv2d(tape, Tensor({1, 4, 4}), Tensor({1, 1, 2, 2}), Tensor({1})),
               ConfigError);
}

TEST(Conv2d, GradientMatchesFiniteDifferences) {
  Rng rng(8);
  const Builder conv = [](GradientTape& t, std::vector<Tensor>& v) {
    return ops::conv2d(t, v[0], v[1], v[2]);
  };
  for (std::size_t k : {1u, 3u, 5u}) {
    std::vector<Tensor> in{random_tensor({2, 5, 4}, rng), random_tensor({3, 2, k, k}, rng),
                           random_tensor({3}, rng)};
    EXPECT_LE(gradient_error(conv, in, rng), 1e-6) << "k=" << k;
  }
}

TEST(GlobalMaxPool, ConstantAndSpike) {
  GradientTape tape;
  const Tensor c = ops::global_max_pool(tape, Tensor({3, 2, 2}, 1.25));
  for (double v : c.values()) EXPECT_EQ(v, 1.25);
  Tensor x({2, 3, 3}, 0.0);
  x[4] = 5.0;
  EXPECT_EQ(ops::global_max_pool(tape, x)[0], 5.0);
}

TEST(GlobalMaxPool, GradientGoesToFirstArgmax) {
  Tensor x({2, 2, 2}, std::vector<double>{1, 3, 3, 0, 2, 2, 2, 2});
  x.set_requires_grad(true);
  GradientTape tape;
  tape.backward(ops::sum(tape, ops::global_max_pool(tape, x)));
  const std::vector<double> expected{0, 1, 0, 0, 1, 0, 0, 0};
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(x.grad()[i], expected[i]) << i;
}

TEST(GlobalMaxPool, GradientMatchesFiniteDifferences) {
  Rng rng(9);
  const Builder pool = [](GradientTape& t, std::vector<Tensor>& v) {
    return ops::global_max_pool(t, v[0]);
  };
  EXPECT_LE(gradient_error(pool, {random_tensor({3, 4, 5}, rng)}, rng), 1e-6);
}

TEST(MaxPool2, ShapeAndGradient) {
  Rng rng(10);
  GradientTape tape;
  EXPECT_EQ(ops::max_pool2(tape, Tensor({2, 5, 4})).shape(), (Shape{2, 2, 2}));
  const Builder pool = [](GradientTape& t, std::vector<Tensor>& v) { return ops::max_pool2(t, v[0]); };
  EXPECT_LE(gradient_error(pool, {random_tensor({2, 6, 4}, rng)}, rng), 1e-6);
}

TEST(Linear, IdentityZeroAndOracle) {
  Rng rng(12);
  GradientTape tape;
  const Tensor x = random_tensor({4}, rng);
  Tensor eye({4, 4}, 0.0);
  for (std::size_t i = 0; i < 4; ++i) eye[i * 4 + i] = 1.0;
  const Tensor same = ops::linear(tape, x, eye, Tensor({4}, 0.0));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(same[i], x[i]);

  const Tensor b = random_tensor({3}, rng);
  const Tensor only_bias = ops::linear(tape, x, Tensor({3, 4}, 0.0), b);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(only_bias[i], b[i]);

  const Tensor w = random_tensor({5, 4}, rng), b5 = random_tensor({5}, rng);
  EXPECT_LE(max_abs_diff(ops::linear(tape, x, w, b5), testing::linear_oracle(x, w, b5)), 1e-12);
  EXPECT_THROW(ops::linear(tape, x, Tensor({5, 3}), b5), ConfigError);

  const Builder lin = [](GradientTape& t, std::vector<Tensor>& v) {
    return ops::linear(t, v[0], v[1], v[2]);
  };
  EXPECT_LE(gradient_error(lin, {x.clone(), w.clone(), b5.clone()}, rng), 1e-6);
}

TEST(Pointwise, KnownValues) {
  GradientTape tape;
  EXPECT_EQ(ops::sigmoid(tape, Tensor({1}, 0.0))[0], 0.5);
  EXPECT_EQ(ops::tanh(tape, Tensor({1}, 0.0))[0], 0.0);
  EXPECT_EQ(ops::relu(tape, Tensor({1}, -1.0))[0], 0.0);
  EXPECT_EQ(ops::abs(tape, Tensor({1}, -2.5))[0], 2.5);
  EXPECT_TRUE(ops::sigmoid(tape, Tensor({2}, std::vector<double>{-800, 800})).all_finite());
}

TEST(Pointwise, ChannelConcatShapes) {
  GradientTape tape;
  const std::vector<Tensor> parts{Tensor({2, 7, 7}), Tensor({3, 7, 7})};
  EXPECT_EQ(ops::channel_concat(tape, parts).shape(), (Shape{5, 7, 7}));
  const std::vector<Tensor> bad{Tensor({2, 7, 7}), Tensor({3, 6, 7})};
  EXPECT_THROW(ops::channel_concat(tape, bad), ConfigError);
}

TEST(Pointwise, BinaryShapeMismatch) {
  GradientTape tape;
  EXPECT_THROW(ops::add(tape, Tensor({2}), Tensor({3})), ConfigError);
  EXPECT_THROW(ops::sub(tape, Tensor({2, 1}), Tensor({1, 2})), ConfigError);
  EXPECT_THROW(ops::hadamard(tape, Tensor({2}), Tensor({2, 1})), ConfigError);
}

TEST(Pointwise, GradientsMatchFiniteDifferences) {
  Rng rng(13);
  const Shape s{2, 3, 3};
  struct Case {
    const char* name;
    Builder op;
    std::size_t arity;
  };
  const std::vector<Case> cases{
      {"relu", [](GradientTape& t, std::vector<Tensor>& v) { return ops::relu(t, v[0]); }, 1},
      {"sigmoid", [](GradientTape& t, std::vector<Tensor>& v) { return ops::sigmoid(t, v[0]); }, 1},
      {"tanh", [](GradientTape& t, std::vector<Tensor>& v) { return ops::tanh(t, v[0]); }, 1},
      {"abs", [](GradientTape& t, std::vector<Tensor>& v) { return ops::abs(t, v[0]); }, 1},
      {"scale", [](GradientTape& t, std::vector<Tensor>& v) { return ops::scale(t, v[0], -1.7); }, 1},
      {"add", [](GradientTape& t, std::vector<Tensor>& v) { return ops::add(t, v[0], v[1]); }, 2},
      {"sub", [](GradientTape& t, std::vector<Tensor>& v) { return ops::sub(t, v[0], v[1]); }, 2},
      {"hadamard", [](GradientTape& t, std::vector<Tensor>& v) { return ops::hadamard(t, v[0], v[1]); }, 2},
      {"channel_concat",
       [](GradientTape& t, std::vector<Tensor>& v) { return ops::channel_concat(t, v); }, 3},
      {"mean", [](GradientTape& t, std::vector<Tensor>& v) { return ops::mean(t, v[0]); }, 1},
      {"mean_of", [](GradientTape& t, std::vector<Tensor>& v) { return ops::mean_of(t, v); }, 3},
  };
  for (const auto& c : cases) {
    std::vector<Tensor> in;
    for (std::size_t i = 0; i < c.arity; ++i) in.push_back(random_away_from_zero(s, rng));
    EXPECT_LE(gradient_error(c.op, in, rng), 1e-6) << c.name;
  }
}

TEST(MeanOf, PermutationIsBitIdentical) {
  Rng rng(14);
  std::vector<Tensor> parts;
  for (int i = 0; i < 7; ++i) parts.push_back(random_tensor({5}, rng, -1e3, 1e3));
  GradientTape tape;
  const Tensor a = ops::mean_of(tape, parts);
  std::shuffle(parts.begin(), parts.end(), rng);
  const Tensor b = ops::mean_of(tape, parts);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(SoftmaxCrossEntropy, KnownValues) {
  GradientTape tape;
  EXPECT_NEAR(ops::softmax_cross_entropy(tape, Tensor({4}, 0.3), 2).item(), std::log(4.0), 1e-15);
  const double big = ops::softmax_cross_entropy(tape, Tensor({2}, std::vector<double>{1000, 0}), 0).item();
  EXPECT_TRUE(std::isfinite(big));
  EXPECT_NEAR(big, 0.0, 1e-12);
  const double huge =
      ops::softmax_cross_entropy(tape, Tensor({3}, std::vector<double>{1e6, -1e6, 0}), 1).item();
  EXPECT_TRUE(std::isfinite(huge));
  EXPECT_THROW(ops::softmax_cross_entropy(tape, Tensor({3}), 3), InputError);
}

TEST(SoftmaxCrossEntropy, GradientIsSoftmaxMinusOneHot) {
  Rng rng(15);
  Tensor logits = random_tensor({5}, rng, -3, 3);
  logits.set_requires_grad(true);
  GradientTape tape;
  tape.backward(ops::softmax_cross_entropy(tape, logits, 3));
  const auto p = ops::softmax(logits.values());
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(logits.grad()[i], p[i] - (i == 3 ? 1.0 : 0.0), 1e-15);
  }
  const Tensor numeric = finite_difference_gradient(
      [&](const Tensor&) {
        GradientTape t(GradientTape::Mode::kInference);
        return ops::softmax_cross_entropy(t, logits, 3).item();
      },
      logits, 1e-5);
  EXPECT_LE(max_rel_error(logits.grad(), numeric.values(), 1e-6), 1e-6);
}

TEST(Ops, IdenticalInputsGiveBitIdenticalOutputs) {
  Rng rng(16);
  const Tensor x = random_tensor({3, 6, 6}, rng), k = random_tensor({4, 3, 3, 3}, rng),
               b = random_tensor({4}, rng);
  GradientTape tape;
  const Tensor a = ops::tanh(tape, ops::conv2d(tape, x, k, b));
  const Tensor c = ops::tanh(tape, ops::conv2d(tape, x, k, b));
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(a[i], c[i]);
}

}  // namespace
}  // namespace pcn
