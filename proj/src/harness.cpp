// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "catequiv/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace catequiv::ood {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

double to_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("grid: '" + s + "' is not a number");
  }
  return v;
}

std::string format(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

// Expands "a:b:step" (inclusive) or a comma list into numbers.
std::vector<double> numeric_grid(std::string_view text) {
  std::vector<double> out;
  const auto range = split(text, ':');
  if (range.size() == 3) {
    const double a = to_double(range[0]);
    const double b = to_double(range[1]);
    const double step = to_double(range[2]);
    if (!(step > 0.0) || b < a) throw std::invalid_argument("grid: need a <= b and step > 0");
    for (std::size_t i = 0;; ++i) {
      const double v = a + static_cast<double>(i) * step;
      if (v > b + 1e-9 * step) break;
      out.push_back(v);
    }
  } else if (range.size() == 1) {
    for (const auto& item : split(text, ',')) out.push_back(to_double(item));
  } else {
    throw std::invalid_argument("grid: expected 'a:b:step' or a comma list");
  }
  return out;
}

}  // namespace

MetricsReport evaluate(const Model& model, const DatasetSplit& data,
                       const std::optional<OodConfig>& ood) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty split");
  if (!ood) return train::evaluate_clean(model, data);
  return train::evaluate_clean(model, make_ood_split(data, *ood));
}

std::string_view name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kShift: return "shift";
    case SweepAxis::kGain: return "gain";
    case SweepAxis::kRotation: return "rotation";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view text) {
  if (text == "shift") return SweepAxis::kShift;
  if (text == "gain") return SweepAxis::kGain;
  if (text == "rotation") return SweepAxis::kRotation;
  throw std::invalid_argument("unknown sweep axis '" + std::string(text) +
                              "' (expected shift, gain or rotation)");
}

std::vector<GridPoint> parse_grid(SweepAxis axis, std::string_view text, std::uint64_t seed) {
  std::vector<GridPoint> grid;
  auto point_seed = [&] { return core::Rng::derive(seed, grid.size()).next_u64(); };
  if (axis == SweepAxis::kGain) {
    for (const auto& item : split(text, ',')) {
      const auto ends = split(item, '-');
      if (ends.empty() || ends.size() > 2 || ends[0].empty()) {
        throw std::invalid_argument("gain grid item '" + item + "' is not 'lo-hi'");
      }
      const double lo = to_double(ends[0]);
      const double hi = ends.size() == 2 ? to_double(ends[1]) : lo;
      OodConfig c = gain_only(lo, hi, point_seed());
      c.validate();
      grid.push_back({format(lo) + "-" + format(hi), c});
    }
  } else {
    for (double v : numeric_grid(text)) {
      OodConfig c;
      if (axis == SweepAxis::kShift) {
        if (v < 0.0 || v != std::floor(v)) {
          throw std::invalid_argument("shift grid values must be non-negative integers");
        }
        c = shift_only(static_cast<long>(v), point_seed());
      } else {
        c = rotation_only(point_seed());
        c.rotation_angle_deg = v;
      }
      c.validate();
      grid.push_back({format(v), c});
    }
  }
  if (grid.empty()) throw std::invalid_argument("grid is empty");
  return grid;
}

std::vector<SweepRow> sweep(const Model& model, const DatasetSplit& data,
                            const std::vector<GridPoint>& grid) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  std::vector<SweepRow> rows;
  for (const auto& p : grid) rows.push_back({p.label, evaluate(model, data, p.config)});
  return rows;
}

std::string_view name(AblationVariant v) {
  switch (v) {
    case AblationVariant::kFull: return "full";
    case AblationVariant::kZeroPadding: return "zero-padding";
    case AblationVariant::kNoRms: return "no-rms";
    case AblationVariant::kUntieAxes: return "untie";
    case AblationVariant::kNoL2: return "no-l2";
    case AblationVariant::kSingleScale: return "single-scale";
    case AblationVariant::kNoGroupNorm: return "no-groupnorm";
    case AblationVariant::kNoSmoothing: return "no-smoothing";
  }
  return "?";
}

const std::vector<AblationVariant>& ablation_variants() {
  static const std::vector<AblationVariant> all = {
      AblationVariant::kFull,        AblationVariant::kZeroPadding, AblationVariant::kNoRms,
      AblationVariant::kUntieAxes,   AblationVariant::kNoL2,        AblationVariant::kSingleScale,
      AblationVariant::kNoGroupNorm, AblationVariant::kNoSmoothing};
  return all;
}

AblationVariant parse_ablation_variant(std::string_view text) {
  for (AblationVariant v : ablation_variants()) {
    if (name(v) == text) return v;
  }
  throw std::invalid_argument("unknown ablation variant '" + std::string(text) + "'");
}

ModelSpec ablation_spec(AblationVariant v, const ModelSpec& base) {
  if (base.kind != model::ModelKind::kCatEquiv) {
    throw std::invalid_argument("ablation_spec: ablations apply to CatEquiv only");
  }
  ModelSpec s = base;
  switch (v) {
    case AblationVariant::kFull: break;
    case AblationVariant::kZeroPadding: s.padding = core::ops::Padding::kZero; break;
    case AblationVariant::kNoRms: s.gain_processing = false; break;
    case AblationVariant::kUntieAxes: s.tie_axes = false; break;
    case AblationVariant::kNoL2: s.l2_over_axes = false; break;
    case AblationVariant::kSingleScale:
      std::fill(s.stage2_kernels.begin(), s.stage2_kernels.end(), s.stage2_kernels.front());
      std::fill(s.stage2_dilations.begin(), s.stage2_dilations.end(), std::size_t{1});
      break;
    case AblationVariant::kNoGroupNorm: s.group_norm = false; break;
    case AblationVariant::kNoSmoothing: s.smoothing = false; break;
  }
  s.validate();
  return s;
}

AblationResult run_ablation(AblationVariant variant, const DatasetSplit& train_data,
                            const DatasetSplit& val_data, const DatasetSplit& test_data,
                            const train::TrainConfig& cfg, const OodConfig& ood,
                            const ModelSpec& base) {
  train::TrainResult trained =
      train::train(ablation_spec(variant, base), train_data, val_data, cfg);
  MetricsReport clean = evaluate(trained.best, test_data);
  MetricsReport shifted = evaluate(trained.best, test_data, ood);
  return {variant, std::move(clean), std::move(shifted), std::move(trained)};
}

void write_report_csv(const MetricsReport& report, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "class,precision,recall,f1,support\n";
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& s = report.per_class[c];
    const std::string label = report.num_classes == signal::kNumClasses
                                  ? std::string(signal::kClassNames[c])
                                  : std::to_string(c);
    out << label << ',' << s.precision << ',' << s.recall << ',' << s.f1 << ',' << s.support
        << '\n';
  }
  out << "macro," << report.macro_precision() << ',' << report.macro_recall() << ','
      << report.macro_f1 << ',' << report.total << '\n';
  out << "accuracy,,," << report.accuracy << ',' << report.total << '\n';
}

void write_report_json(const MetricsReport& report, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << metrics::to_json(report).dump(2) << '\n';
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "grid_point,accuracy,macro_f1\n";
  for (const auto& r : rows) {
    out << r.grid_point << ',' << r.report.accuracy << ',' << r.report.macro_f1 << '\n';
  }
}

}  // namespace catequiv::ood
