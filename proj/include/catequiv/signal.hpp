// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// Inertial windows, per-sensor gain processing and the UCI-HAR loader.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "catequiv/symmetry.hpp"
#include "catequiv/tensor.hpp"

namespace catequiv::signal {

using core::Tensor;
using symmetry::Sensor;

inline constexpr std::size_t kWindowLength = 128;
inline constexpr std::size_t kNumClasses = 6;
inline constexpr std::size_t kRawChannels = 6;
inline constexpr std::size_t kInputChannels = 8;
inline constexpr double kDefaultEpsilon = 1e-6;

inline constexpr std::array<const char*, kNumClasses> kClassNames = {
    "WALKING", "WALKING_UPSTAIRS", "WALKING_DOWNSTAIRS",
    "SITTING", "STANDING",         "LAYING"};

/// One raw window. `values` is [6 x T], rows ACCx ACCy ACCz GYRx GYRy GYRz.
/// Labels follow the dataset convention 1..6.
struct Window {
  Tensor values;
  int label = 0;
  int subject = 0;

  std::size_t length() const { return values.dim(1); }
  /// Zero-based class index.
  std::size_t class_index() const { return static_cast<std::size_t>(label - 1); }
  /// [3 x T] block of one sensor.
  Tensor sensor(Sensor s) const;
};

struct RmsStats {
  double energy = 0.0;   // R = mean of squares over axes and time
  double scale = 0.0;    // max(eps, sqrt(R))
  double log_rms = 0.0;  // 0.5 * log(max(R, eps^2))
};

/// Per-sensor energy and scales of a [3 x T] block. The log-RMS is clamped
/// at log(eps) so that silent sensors stay finite.
RmsStats compute_rms(const Tensor& sensor_block, double epsilon = kDefaultEpsilon);

/// x / max(eps, sqrt(R(x))) for a [3 x T] block.
Tensor normalize_sensor(const Tensor& sensor_block, double epsilon = kDefaultEpsilon);

struct ProcessedInput {
  Tensor axes;             // [6 x T] normalized ACC then GYR rows
  double log_rms_acc = 0;  // r_ACC
  double log_rms_gyr = 0;  // r_GYR
  Tensor assembled;        // [8 x T]: axes, then r_ACC and r_GYR repeated over time
};

ProcessedInput gain_process(const Window& window, double epsilon = kDefaultEpsilon);

enum class SplitKind { kTrain, kValidation, kTest };

struct DatasetSplit {
  std::vector<Window> windows;
  SplitKind split = SplitKind::kTrain;

  std::size_t size() const { return windows.size(); }
  bool empty() const { return windows.empty(); }
  std::array<std::size_t, kNumClasses> class_counts() const;
};

/// Which accelerometer files feed the ACC rows.
enum class AccSource { kTotal, kBody };

struct LoadOptions {
  AccSource acc_source = AccSource::kTotal;
  std::size_t window_length = kWindowLength;
};

class DataError : public std::runtime_error {
 public:
  enum class Kind {
    kMissingFile,
    kRowCountMismatch,
    kNonNumeric,
    kBadRowLength,
    kBadLabel,
  };

  DataError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Reads `<root>/<train|test>/Inertial Signals/*` plus the label file.
/// Only kTrain and kTest are valid here; validation is carved out of train
/// with stratified_split.
DatasetSplit load_ucihar(const std::filesystem::path& root, SplitKind split,
                         const LoadOptions& options = {});

/// Seeded class-stratified split: returns (train, validation) where each
/// class contributes round(fraction * n_c) windows to validation.
std::pair<DatasetSplit, DatasetSplit> stratified_split(const DatasetSplit& data,
                                                       double fraction,
                                                       std::uint64_t seed);

}  // namespace catequiv::signal
