// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "catequiv/metrics.hpp"

#include <stdexcept>
#include <string>

namespace catequiv::metrics {

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

MacroAverages macro_average(std::span<const ClassScores> classes) {
  MacroAverages out;
  if (classes.empty()) return out;
  for (const auto& c : classes) {
    out.precision += c.precision;
    out.recall += c.recall;
    out.f1 += c.f1;
  }
  const double k = static_cast<double>(classes.size());
  out.precision /= k;
  out.recall /= k;
  out.f1 /= k;
  return out;
}

double MetricsReport::macro_precision() const { return macro_average(per_class).precision; }
double MetricsReport::macro_recall() const { return macro_average(per_class).recall; }

MetricsReport from_confusion(std::vector<std::vector<std::size_t>> confusion) {
  const std::size_t k = confusion.size();
  if (k == 0) throw std::invalid_argument("from_confusion: empty matrix");
  for (const auto& row : confusion) {
    if (row.size() != k) throw std::invalid_argument("from_confusion: matrix is not square");
  }
  MetricsReport r;
  r.num_classes = k;
  r.per_class.resize(k);
  std::size_t correct = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t row_sum = 0;
    std::size_t col_sum = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row_sum += confusion[c][j];
      col_sum += confusion[j][c];
    }
    const std::size_t tp = confusion[c][c];
    correct += tp;
    r.total += row_sum;
    ClassScores& s = r.per_class[c];
    s.support = row_sum;
    s.precision = col_sum ? static_cast<double>(tp) / static_cast<double>(col_sum) : 0.0;
    s.recall = row_sum ? static_cast<double>(tp) / static_cast<double>(row_sum) : 0.0;
    s.f1 = f1_score(s.precision, s.recall);
  }
  if (r.total == 0) throw std::invalid_argument("from_confusion: no samples");
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
  r.macro_f1 = macro_average(r.per_class).f1;
  r.confusion = std::move(confusion);
  return r;
}

MetricsReport compute_metrics(std::span<const std::size_t> labels,
                              std::span<const std::size_t> predictions,
                              std::size_t num_classes) {
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument("compute_metrics: " + std::to_string(labels.size()) +
                                " labels vs " + std::to_string(predictions.size()) +
                                " predictions");
  }
  if (labels.empty()) throw std::invalid_argument("compute_metrics: empty input");
  if (num_classes == 0) throw std::invalid_argument("compute_metrics: zero classes");
  std::vector<std::vector<std::size_t>> confusion(num_classes,
                                                  std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes || predictions[i] >= num_classes) {
      throw std::invalid_argument("compute_metrics: class index out of range at " +
                                  std::to_string(i));
    }
    ++confusion[labels[i]][predictions[i]];
  }
  return from_confusion(std::move(confusion));
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : report.per_class) {
    classes.push_back({{"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support}});
  }
  return {{"num_classes", report.num_classes},
          {"total", report.total},
          {"accuracy", report.accuracy},
          {"macro_f1", report.macro_f1},
          {"macro_precision", report.macro_precision()},
          {"macro_recall", report.macro_recall()},
          {"per_class", classes},
          {"confusion", report.confusion}};
}

MetricsReport report_from_json(const nlohmann::json& j) {
  return from_confusion(j.at("confusion").get<std::vector<std::vector<std::size_t>>>());
}

}  // namespace catequiv::metrics
