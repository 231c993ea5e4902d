// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// OOD evaluation, one-axis robustness sweeps and ablation runs.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "catequiv/metrics.hpp"
#include "catequiv/model.hpp"
#include "catequiv/perturbation.hpp"
#include "catequiv/training.hpp"

namespace catequiv::ood {

using metrics::MetricsReport;
using model::Model;
using model::ModelSpec;

/// Clean evaluation when `ood` is empty; otherwise on make_ood_split(data, *ood).
MetricsReport evaluate(const Model& model, const DatasetSplit& data,
                       const std::optional<OodConfig>& ood = std::nullopt);

enum class SweepAxis { kShift, kGain, kRotation };

std::string_view name(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view text);

/// One grid point. Shift points are ranges (Delta ~ Unif{-m..m}), gain
/// points are intervals [lo, hi], rotation points are angles in degrees
/// about a uniformly random axis.
struct GridPoint {
  std::string label;
  OodConfig config;
};

/// Parses "a:b:step", comma lists, or (gain axis) "lo-hi" items such as
/// "0.7-1.4,0.5-2". A single gain value g means [g, g]. Every point gets
/// its own seed Rng::derive(seed, index).
std::vector<GridPoint> parse_grid(SweepAxis axis, std::string_view text, std::uint64_t seed);

struct SweepRow {
  std::string grid_point;
  MetricsReport report;
};

std::vector<SweepRow> sweep(const Model& model, const DatasetSplit& data,
                            const std::vector<GridPoint>& grid);

enum class AblationVariant {
  kFull,
  kZeroPadding,
  kNoRms,
  kUntieAxes,
  kNoL2,
  kSingleScale,
  kNoGroupNorm,
  kNoSmoothing,
};

std::string_view name(AblationVariant v);
/// Ids: full, zero-padding, no-rms, untie, no-l2, single-scale,
/// no-groupnorm, no-smoothing.
AblationVariant parse_ablation_variant(std::string_view text);
const std::vector<AblationVariant>& ablation_variants();

/// CatEquiv spec with one structural change applied to `base`.
ModelSpec ablation_spec(AblationVariant v, const ModelSpec& base = model::catequiv_spec());

struct AblationResult {
  AblationVariant variant = AblationVariant::kFull;
  MetricsReport clean;
  MetricsReport ood;
  train::TrainResult training;
};

/// Trains the variant under `cfg` and evaluates on `test`, clean and under `ood`.
AblationResult run_ablation(AblationVariant variant, const DatasetSplit& train_data,
                            const DatasetSplit& val_data, const DatasetSplit& test_data,
                            const train::TrainConfig& cfg, const OodConfig& ood,
                            const ModelSpec& base = model::catequiv_spec());

/// One row per class plus a "macro" row and an "overall" accuracy row.
void write_report_csv(const MetricsReport& report, const std::filesystem::path& path);
void write_report_json(const MetricsReport& report, const std::filesystem::path& path);
/// Columns: grid_point, accuracy, macro_f1.
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

}  // namespace catequiv::ood
