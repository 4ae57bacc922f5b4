// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcn/manifest.hpp"
#include "pcn/model.hpp"

namespace pcn {

using Matrix = std::vector<std::vector<double>>;

struct Metrics {
  double top1 = 0.0;
  double top5 = 0.0;
  std::vector<double> per_class;
  /// Rows are true labels, columns predictions; row-normalized, rows of
  /// absent classes stay zero.
  Matrix confusion;
  std::size_t samples = 0;
  std::vector<std::string> classes;

  bool operator==(const Metrics&) const = default;
};

/// Raw counts; throws InputError on out-of-range labels or predictions.
Matrix confusion_counts(std::span<const std::size_t> predictions,
                        std::span<const std::size_t> labels, std::size_t num_classes);
/// Row-normalized counts.
Matrix confusion_matrix(std::span<const std::size_t> predictions,
                        std::span<const std::size_t> labels, std::size_t num_classes);

/// Whether label ranks within the k best scores. Ties rank the lower class
/// index first, consistent with argmax.
bool in_top_k(std::span<const double> scores, std::size_t label, std::size_t k);

/// Metrics from per-sample score vectors. top-5 clamps k to the class count.
Metrics compute_metrics(const Matrix& scores, std::span<const std::size_t> labels,
                        const std::vector<std::string>& classes);

/// One deterministic pass (eval window + uniform subsampling) per clip.
Metrics evaluate(const ActionModel& model, const Dataset& data, std::size_t window);

nlohmann::json to_json(const Metrics& metrics);
Metrics metrics_from_json(const nlohmann::json& j);

/// Writes metrics.json, confusion.csv and confusion.ppm into out_dir.
void emit_report(const Metrics& metrics, const std::filesystem::path& out_dir);

/// P6 heatmap: cell = max(1, 256 / K) pixels, gray level round(255 * value).
std::string render_confusion_ppm(const Matrix& confusion);
std::string render_confusion_csv(const Metrics& metrics);

}  // namespace pcn
