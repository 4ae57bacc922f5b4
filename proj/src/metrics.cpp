// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pcn/errors.hpp"
#include "pcn/trainer.hpp"

namespace pcn {

using nlohmann::json;

Matrix confusion_counts(std::span<const std::size_t> predictions,
                        std::span<const std::size_t> labels, std::size_t num_classes) {
  if (predictions.size() != labels.size()) {
    throw InputError("confusion matrix needs equally many predictions and labels");
  }
  Matrix m(num_classes, std::vector<double>(num_classes, 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes || predictions[i] >= num_classes) {
      throw InputError("sample " + std::to_string(i) + " has label " + std::to_string(labels[i]) +
                       " / prediction " + std::to_string(predictions[i]) + " outside " +
                       std::to_string(num_classes) + " classes");
    }
    m[labels[i]][predictions[i]] += 1.0;
  }
  return m;
}

Matrix confusion_matrix(std::span<const std::size_t> predictions,
                        std::span<const std::size_t> labels, std::size_t num_classes) {
  Matrix m = confusion_counts(predictions, labels, num_classes);
  for (auto& row : m) {
    double total = 0.0;
    for (double v : row) total += v;
    if (total > 0.0) {
      for (double& v : row) v /= total;
    }
  }
  return m;
}

bool in_top_k(std::span<const double> scores, std::size_t label, std::size_t k) {
  if (label >= scores.size()) throw InputError("label outside the score vector");
  std::size_t ahead = 0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    if (scores[c] > scores[label] || (scores[c] == scores[label] && c < label)) ++ahead;
  }
  return ahead < k;
}

Metrics compute_metrics(const Matrix& scores, std::span<const std::size_t> labels,
                        const std::vector<std::string>& classes) {
  if (scores.empty()) throw UsageError("no samples to evaluate");
  if (scores.size() != labels.size()) throw InputError("scores and labels differ in length");
  const std::size_t k = classes.size();
  const std::size_t top_k = std::min<std::size_t>(5, k);
  Metrics m;
  m.classes = classes;
  m.samples = labels.size();
  std::vector<std::size_t> preds(labels.size());
  std::size_t hit1 = 0, hit5 = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (scores[i].size() != k) throw InputError("score vector length differs from class count");
    preds[i] = argmax(scores[i]);
    if (preds[i] == labels[i]) ++hit1;
    if (in_top_k(scores[i], labels[i], top_k)) ++hit5;
  }
  const double n = static_cast<double>(labels.size());
  m.top1 = static_cast<double>(hit1) / n;
  m.top5 = static_cast<double>(hit5) / n;
  m.confusion = confusion_matrix(preds, labels, k);
  for (std::size_t c = 0; c < k; ++c) m.per_class.push_back(m.confusion[c][c]);
  return m;
}

Metrics evaluate(const ActionModel& model, const Dataset& data, std::size_t window) {
  if (data.clips.empty()) throw UsageError("cannot evaluate an empty manifest");
  Matrix scores;
  std::vector<std::size_t> labels;
  for (const auto& clip : data.clips) {
    const auto p = predict_clip(model, eval_inputs(clip, model.config(), window));
    scores.push_back(p.scores);
    labels.push_back(clip.label);
  }
  return compute_metrics(scores, labels, data.manifest.classes);
}

json to_json(const Metrics& m) {
  return {{"top1", m.top1},       {"top5", m.top5},       {"per_class", m.per_class},
          {"confusion", m.confusion}, {"samples", m.samples}, {"classes", m.classes}};
}

Metrics metrics_from_json(const json& j) {
  try {
    Metrics m;
    m.top1 = j.at("top1").get<double>();
    m.top5 = j.at("top5").get<double>();
    m.per_class = j.at("per_class").get<std::vector<double>>();
    m.confusion = j.at("confusion").get<Matrix>();
    m.samples = j.at("samples").get<std::size_t>();
    m.classes = j.at("classes").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed metrics: ") + e.what());
  }
}

std::string render_confusion_csv(const Metrics& m) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t c = 0; c < m.classes.size(); ++c) os << (c ? "," : "") << m.classes[c];
  os << '\n';
  for (const auto& row : m.confusion) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << '\n';
  }
  return os.str();
}

std::string render_confusion_ppm(const Matrix& confusion) {
  const std::size_t k = confusion.size();
  if (k == 0) throw UsageError("empty confusion matrix");
  const std::size_t cell = std::max<std::size_t>(1, 256 / k);
  const std::size_t side = cell * k;
  std::string out = "P6\n" + std::to_string(side) + " " + std::to_string(side) + "\n255\n";
  out.reserve(out.size() + 3 * side * side);
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      const double v = std::clamp(confusion[y / cell][x / cell], 0.0, 1.0);
      const char g = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v)));
      out.append(3, g);
    }
  }
  return out;
}

void emit_report(const Metrics& metrics, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const char* name, const std::string& text, std::ios::openmode mode) {
    const auto path = out_dir / name;
    std::ofstream os(path, mode | std::ios::trunc);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw Error("failed writing " + path.string());
  };
  write("metrics.json", to_json(metrics).dump(2) + "\n", std::ios::out);
  write("confusion.csv", render_confusion_csv(metrics), std::ios::out);
  write("confusion.ppm", render_confusion_ppm(metrics.confusion), std::ios::out | std::ios::binary);
}

}  // namespace pcn
