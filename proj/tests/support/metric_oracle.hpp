// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "catequiv/metrics.hpp"

namespace catequiv::testing {

// Brute-force metrics straight from the (label, prediction) pairs. No
// confusion matrix; each count is a separate pass over the data.
struct OracleMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> precision, recall, f1;
};

inline OracleMetrics oracle_metrics(std::span<const std::size_t> y,
                                    std::span<const std::size_t> p, std::size_t k) {
  OracleMetrics o;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += y[i] == p[i] ? 1 : 0;
  o.accuracy = static_cast<double>(hits) / static_cast<double>(y.size());
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (p[i] == c && y[i] == c) ++tp;
      if (p[i] == c && y[i] != c) ++fp;
      if (p[i] != c && y[i] == c) ++fn;
    }
    const double prec = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double rec = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double f = prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    o.precision.push_back(prec);
    o.recall.push_back(rec);
    o.f1.push_back(f);
    f1_sum += f;
  }
  o.macro_f1 = f1_sum / static_cast<double>(k);
  return o;
}

inline bool matches_exactly(const metrics::MetricsReport& r, const OracleMetrics& o) {
  if (r.accuracy != o.accuracy || r.macro_f1 != o.macro_f1) return false;
  for (std::size_t c = 0; c < o.f1.size(); ++c) {
    const auto& s = r.per_class[c];
    if (s.precision != o.precision[c] || s.recall != o.recall[c] || s.f1 != o.f1[c]) return false;
  }
  return true;
}

}  // namespace catequiv::testing
