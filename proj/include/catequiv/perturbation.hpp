// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// Composite OOD perturbations on raw [6 x T] windows: cyclic time shift,
// per-sensor gain drift and one rotation shared by ACC and GYR.

#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include <json.hpp>

#include "catequiv/rng.hpp"
#include "catequiv/signal.hpp"
#include "catequiv/symmetry.hpp"

namespace catequiv::ood {

using core::Rng;
using signal::DatasetSplit;
using signal::Window;
using symmetry::Gain;

using Matrix3 = std::array<std::array<double, 3>, 3>;

Matrix3 identity3();
Matrix3 multiply(const Matrix3& a, const Matrix3& b);
Matrix3 transpose(const Matrix3& a);
double determinant(const Matrix3& a);
/// max |R^T R - I| entrywise.
double orthogonality_error(const Matrix3& r);

/// Haar-distributed SO(3) element: QR of a Gaussian matrix, columns of Q
/// multiplied by sign(diag R), one column negated if det(Q) = -1.
Matrix3 sample_rotation(Rng& rng);
/// Rotation by `radians` about `axis` (normalized internally).
Matrix3 axis_angle(const std::array<double, 3>& axis, double radians);

struct OodConfig {
  long shift_range = 18;  // Delta ~ Unif{-shift_range..shift_range}
  double gain_lo = 0.7;
  double gain_hi = 1.4;
  bool rotate = true;
  /// When set, rotations use this fixed angle (degrees) about a uniformly
  /// random axis instead of a Haar draw. Used by the rotation sweep.
  std::optional<double> rotation_angle_deg;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless 0 <= shift_range < length and
  /// 0 < gain_lo <= gain_hi.
  void validate(std::size_t length = signal::kWindowLength) const;
};

/// Shift-only, gain-only and rotation-only configs with everything else off.
OodConfig shift_only(long range, std::uint64_t seed);
OodConfig gain_only(double lo, double hi, std::uint64_t seed);
OodConfig rotation_only(std::uint64_t seed);

struct Perturbation {
  long shift = 0;
  Gain gain{1.0, 1.0};
  Matrix3 rotation = identity3();
};

/// Draws Delta, the two gains and the rotation from independent child
/// streams of one value taken from `rng`, so switching one component off
/// leaves the others unchanged.
Perturbation sample_perturbation(const OodConfig& cfg, Rng& rng);

Window apply_shift(const Window& w, long shift);
Window apply_gain(const Window& w, Gain gain);
/// x_s -> R x_s for both sensor triples.
Window apply_rotation(const Window& w, const Matrix3& r);
/// Shift, then gain, then rotation.
Window apply_perturbation(const Window& w, const Perturbation& p);

Window perturb(const Window& w, const OodConfig& cfg, Rng& rng);

/// Perturbed copy of a split. Window i uses Rng::derive(cfg.seed, i), so
/// every model evaluated with the same config sees the same windows.
DatasetSplit make_ood_split(const DatasetSplit& data, const OodConfig& cfg);

nlohmann::json to_json(const OodConfig& cfg);
/// Missing keys keep their defaults.
OodConfig ood_config_from_json(const nlohmann::json& j);

}  // namespace catequiv::ood
