// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// Confusion-matrix classification metrics. Rows of the confusion matrix are
// true classes, columns are predictions. Any 0/0 in precision, recall or F1
// is reported as 0.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace catequiv::metrics {

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct MetricsReport {
  std::size_t num_classes = 0;
  std::size_t total = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassScores> per_class;
  std::vector<std::vector<std::size_t>> confusion;

  double macro_precision() const;
  double macro_recall() const;
};

/// 2PR/(P+R), 0 when P+R == 0.
double f1_score(double precision, double recall);

MetricsReport from_confusion(std::vector<std::vector<std::size_t>> confusion);

/// Throws std::invalid_argument on length mismatch, empty input or labels
/// outside [0, num_classes).
MetricsReport compute_metrics(std::span<const std::size_t> labels,
                              std::span<const std::size_t> predictions,
                              std::size_t num_classes);

struct MacroAverages {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Unweighted means over classes.
MacroAverages macro_average(std::span<const ClassScores> classes);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

}  // namespace catequiv::metrics
