// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pcn/errors.hpp"
#include "pcn/metrics.hpp"
#include "pcn/model.hpp"
#include "test_support.hpp"

namespace pcn {
namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Matrix random_scores(std::size_t n, std::size_t k, Rng& rng) {
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  Matrix s(n, std::vector<double>(k));
  for (auto& row : s) {
    for (double& v : row) v = d(rng);
  }
  return s;
}

std::vector<std::string> class_names(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

TEST(Confusion, PerfectPredictionsGiveIdentity) {
  const std::vector<std::size_t> y{0, 1, 2, 2, 1};
  const Matrix m = confusion_matrix(y, y, 3);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(m[r][c], r == c ? 1.0 : 0.0);
  }
}

TEST(Confusion, SplitRowAndAbsentClass) {
  const std::vector<std::size_t> labels{0, 0}, preds{0, 1};
  const Matrix m = confusion_matrix(preds, labels, 3);
  EXPECT_EQ(m[0], (std::vector<double>{0.5, 0.5, 0.0}));
  EXPECT_EQ(m[1], (std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_EQ(m[2], (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(Confusion, CountsSumToSamplesAndErrors) {
  Rng rng(1);
  std::uniform_int_distribution<std::size_t> d(0, 4);
  std::vector<std::size_t> preds(137), labels(137);
  for (std::size_t i = 0; i < 137; ++i) {
    preds[i] = d(rng);
    labels[i] = d(rng);
  }
  double total = 0.0;
  for (const auto& row : confusion_counts(preds, labels, 5)) {
    for (double v : row) total += v;
  }
  EXPECT_EQ(total, 137.0);
  const std::vector<std::size_t> bad{5};
  const std::vector<std::size_t> ok{0};
  EXPECT_THROW(confusion_matrix(bad, ok, 5), InputError);
  EXPECT_THROW(confusion_matrix(ok, bad, 5), InputError);
  EXPECT_THROW(confusion_matrix(ok, std::vector<std::size_t>{0, 1}, 5), InputError);
}

TEST(TopK, TiesRankLowerIndexFirst) {
  const std::vector<double> s{1.0, 3.0, 3.0, 0.0};
  EXPECT_TRUE(in_top_k(s, 1, 1));
  EXPECT_FALSE(in_top_k(s, 2, 1));
  EXPECT_TRUE(in_top_k(s, 2, 2));
  EXPECT_FALSE(in_top_k(s, 3, 3));
  EXPECT_TRUE(in_top_k(s, 3, 10));
}

TEST(Metrics, AllOneClassOnBalancedLabels) {
  const Matrix scores{{1.0, 0.0}, {1.0, 0.0}, {2.0, 1.0}, {0.5, 0.0}};
  const std::vector<std::size_t> labels{0, 1, 0, 1};
  const Metrics m = compute_metrics(scores, labels, {"a", "b"});
  EXPECT_EQ(m.top1, 0.5);
  EXPECT_EQ(m.top5, 1.0);
  EXPECT_EQ(m.confusion[0], (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(m.confusion[1], (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(m.per_class, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(m.samples, 4u);
}

// The algebra that holds on every run: normalized rows, diagonal top-1 and
// top-5 containment.
TEST(Metrics, AlgebraOverRandomRuns) {
  Rng rng(2);
  for (int run = 0; run < 200; ++run) {
    const std::size_t k = 2 + run % 9, n = 1 + run % 60;
    const Matrix scores = random_scores(n, k, rng);
    std::vector<std::size_t> labels(n);
    std::uniform_int_distribution<std::size_t> d(0, k - 1);
    for (auto& l : labels) l = d(rng);
    const Metrics m = compute_metrics(scores, labels, class_names(k));

    std::vector<double> class_count(k, 0.0);
    for (auto l : labels) class_count[l] += 1.0;
    double diag_correct = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      double sum = 0.0;
      for (double v : m.confusion[r]) sum += v;
      if (class_count[r] > 0) {
        EXPECT_NEAR(sum, 1.0, 1e-12);
      } else {
        EXPECT_EQ(sum, 0.0);
      }
      diag_correct += m.confusion[r][r] * class_count[r];
    }
    std::size_t direct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      direct += static_cast<std::size_t>(
                    std::max_element(scores[i].begin(), scores[i].end()) - scores[i].begin()) ==
                labels[i];
    }
    EXPECT_NEAR(diag_correct / static_cast<double>(n), m.top1, 1e-12);
    EXPECT_EQ(m.top1, static_cast<double>(direct) / static_cast<double>(n));
    EXPECT_GE(m.top5, m.top1);
    EXPECT_LE(m.top5, 1.0);
    if (k <= 5) EXPECT_EQ(m.top5, 1.0);
  }
}

TEST(Metrics, JsonRoundTripIsExact) {
  Rng rng(3);
  const Matrix scores = random_scores(40, 7, rng);
  std::vector<std::size_t> labels(40);
  for (std::size_t i = 0; i < 40; ++i) labels[i] = i % 7;
  const Metrics m = compute_metrics(scores, labels, class_names(7));
  EXPECT_EQ(metrics_from_json(to_json(m)), m);
  const auto j = to_json(m);
  for (const char* key : {"top1", "top5", "per_class", "confusion", "samples", "classes"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Report, PpmDiagonal) {
  const Matrix id{{1.0, 0.0}, {0.0, 1.0}};
  const std::string ppm = render_confusion_ppm(id);
  const std::string header = "P6\n256 256\n255\n";
  ASSERT_EQ(ppm.substr(0, header.size()), header);
  ASSERT_EQ(ppm.size(), header.size() + 3 * 256 * 256);
  const auto pixel = [&](std::size_t y, std::size_t x) {
    return static_cast<unsigned char>(ppm[header.size() + 3 * (y * 256 + x)]);
  };
  EXPECT_EQ(pixel(0, 0), 255);
  EXPECT_EQ(pixel(200, 200), 255);
  EXPECT_EQ(pixel(0, 200), 0);
  EXPECT_EQ(pixel(200, 0), 0);
}

TEST(Report, PpmRoundsIntensity) {
  const Matrix m{{0.5, 0.5, 0.0}, {0.0, 1.0, 0.0}, {0.2, 0.0, 0.8}};
  const std::string ppm = render_confusion_ppm(m);
  const std::string header = "P6\n255 255\n255\n";  // cell 85 px
  ASSERT_EQ(ppm.substr(0, header.size()), header);
  const auto pixel = [&](std::size_t y, std::size_t x) {
    return static_cast<unsigned char>(ppm[header.size() + 3 * (y * 255 + x)]);
  };
  EXPECT_EQ(pixel(0, 0), 128);
  EXPECT_EQ(pixel(170, 0), 51);
  EXPECT_EQ(pixel(170, 170), 204);
}

TEST(Report, CsvHasHeaderPlusOneRowPerClass) {
  Rng rng(4);
  const Matrix scores = random_scores(20, 4, rng);
  std::vector<std::size_t> labels(20);
  for (std::size_t i = 0; i < 20; ++i) labels[i] = i % 4;
  const std::string csv = render_confusion_csv(compute_metrics(scores, labels, class_names(4)));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "c0,c1,c2,c3");
}

TEST(Report, FilesAreByteStable) {
  Rng rng(5);
  const Matrix scores = random_scores(30, 3, rng);
  std::vector<std::size_t> labels(30);
  for (std::size_t i = 0; i < 30; ++i) labels[i] = i % 3;
  const Metrics m = compute_metrics(scores, labels, class_names(3));
  const auto a = testing::temp_dir("report_a"), b = testing::temp_dir("report_b");
  emit_report(m, a);
  emit_report(metrics_from_json(nlohmann::json::parse(slurp(a / "metrics.json"))), b);
  for (const char* f : {"metrics.json", "confusion.csv", "confusion.ppm"}) {
    EXPECT_FALSE(slurp(a / f).empty()) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Evaluate, BiasedModelPredictsOneClass) {
  ModelConfig c;
  c.prednet.repr_channels = {2, 2};
  c.prednet.input_channels = 3;
  c.prednet.height = c.prednet.width = 4;
  c.prednet.time_steps = 3;
  c.num_classes = 2;
  ActionModel model(c);
  model.head().bias[0] = 1.0;
  Dataset data;
  data.manifest.classes = {"a", "b"};
  for (std::size_t i = 0; i < 6; ++i) {
    FeatureClip clip;
    clip.num_frames = 5;
    clip.channels = 3;
    clip.height = clip.width = 4;
    clip.frames.assign(5 * 48, 0.25f);
    clip.label = i % 2;
    data.clips.push_back(clip);
  }
  const Metrics m = evaluate(model, data, 5);
  EXPECT_EQ(m.top1, 0.5);
  EXPECT_EQ(m.top5, 1.0);
  EXPECT_EQ(m.confusion[1], (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(m.classes, data.manifest.classes);
  EXPECT_THROW(evaluate(model, Dataset{}, 5), UsageError);
}

}  // namespace
}  // namespace pcn
