// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// Synthetic inertial windows for tests. Dynamic classes oscillate at a
// class-specific frequency, static classes differ in gravity direction.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <string>

#include "catequiv/model.hpp"
#include "catequiv/rng.hpp"
#include "catequiv/signal.hpp"

namespace catequiv::testing {

inline signal::Window synthetic_window(std::size_t cls, std::size_t length, core::Rng& rng) {
  signal::Window w;
  w.label = static_cast<int>(cls) + 1;
  w.values = core::Tensor({signal::kRawChannels, length});
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const bool dynamic = cls < 3;
  const double freq = 1.0 + static_cast<double>(cls);  // cycles per window
  const double gravity_axis[6][3] = {{1, 0, 0}, {1, 0.3, 0}, {1, -0.3, 0},
                                     {0.7, 0.7, 0}, {1, 0, 0.2}, {0, 0, 1}};
  for (std::size_t t = 0; t < length; ++t) {
    const double s = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(t) /
                                  static_cast<double>(length) + phase);
    for (std::size_t a = 0; a < 3; ++a) {
      const double acc = gravity_axis[cls][a] + (dynamic ? 0.6 * s * (a + 1) / 3.0 : 0.0);
      const double gyr = dynamic ? 0.8 * s * (3.0 - a) / 3.0 : 0.02 * (a + 1);
      w.values[a * length + t] = acc + 0.05 * rng.normal();
      w.values[(3 + a) * length + t] = gyr + 0.05 * rng.normal();
    }
  }
  return w;
}

inline signal::DatasetSplit synthetic_split(std::size_t per_class, std::size_t length,
                                            std::uint64_t seed,
                                            signal::SplitKind kind = signal::SplitKind::kTrain) {
  core::Rng rng(seed);
  signal::DatasetSplit out;
  out.split = kind;
  for (std::size_t i = 0; i < per_class; ++i)
    for (std::size_t c = 0; c < signal::kNumClasses; ++c)
      out.windows.push_back(synthetic_window(c, length, rng));
  return out;
}

/// Writes a split in the UCI HAR directory layout (total_acc and body_acc
/// get the same values).
inline void write_ucihar_split(const std::filesystem::path& root, const std::string& tag,
                               const signal::DatasetSplit& data) {
  namespace fs = std::filesystem;
  const fs::path sig = root / tag / "Inertial Signals";
  fs::create_directories(sig);
  const char* names[] = {"total_acc_x", "total_acc_y", "total_acc_z", "body_acc_x", "body_acc_y",
                         "body_acc_z",  "body_gyro_x", "body_gyro_y", "body_gyro_z"};
  const std::size_t rows[] = {0, 1, 2, 0, 1, 2, 3, 4, 5};
  for (std::size_t f = 0; f < 9; ++f) {
    std::ofstream out(sig / (std::string(names[f]) + "_" + tag + ".txt"));
    out << std::setprecision(17);
    for (const auto& w : data.windows) {
      const std::size_t length = w.length();
      for (std::size_t t = 0; t < length; ++t) out << ' ' << w.values[rows[f] * length + t];
      out << '\n';
    }
  }
  std::ofstream y(root / tag / ("y_" + tag + ".txt"));
  for (const auto& w : data.windows) y << w.label << '\n';
}

/// T = 16, C1 = 2, C2 = (2, 2, 2): small enough for finite differences.
inline model::ModelSpec tiny_spec(model::ModelKind kind = model::ModelKind::kCatEquiv,
                                  std::size_t length = 16) {
  model::ModelSpec s = model::default_spec(kind);
  s.length = length;
  s.stage1_channels = 2;
  s.stage1_kernel = 3;
  s.stage2_channels = {2, 2, 2};
  s.stage2_kernels = {3, 3, 5};
  s.stage2_dilations = {1, 2, 3};
  s.box_kernel = 3;
  s.baseline_channels = 4;
  s.baseline_kernel1 = 3;
  s.baseline_kernel2 = 3;
  return s;
}

/// A few times larger than tiny_spec; used where training has to learn.
inline model::ModelSpec small_spec(model::ModelKind kind = model::ModelKind::kCatEquiv,
                                   std::size_t length = 32) {
  model::ModelSpec s = tiny_spec(kind, length);
  s.stage1_channels = 6;
  s.stage1_kernel = 5;
  s.stage2_channels = {8, 4, 4};
  s.stage2_kernels = {5, 5, 7};
  s.baseline_channels = 8;
  s.baseline_kernel1 = 5;
  s.baseline_kernel2 = 5;
  return s;
}

}  // namespace catequiv::testing
