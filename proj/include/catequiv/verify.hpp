// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// Numerical checks of the symmetry properties of the implemented layers.
// Naturality is checked on the linear core, invariance on the eval-mode
// head descriptor z, gain behaviour as a shift of the two log-RMS entries.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "catequiv/model.hpp"

namespace catequiv::verify {

using model::Model;
using model::ModelSpec;

struct CheckResult {
  std::string name;
  std::size_t trials = 0;
  double max_abs_deviation = 0.0;
  double max_rel_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;  // max_abs_deviation <= tolerance
  /// Negative controls are expected to fail.
  bool expect_pass = true;
  std::uint64_t seed = 0;
  std::string detail;

  bool ok() const { return pass == expect_pass; }
};

nlohmann::json to_json(const CheckResult& r);

inline constexpr double kNaturalityTol = 1e-9;
inline constexpr double kPosetTol = 1e-12;
inline constexpr double kReadoutTol = 1e-9;
inline constexpr double kGroupNormTol = 1e-12;
inline constexpr double kNormFloorTol = 1e-10;
/// An untied Stage-1 must move z by more than this under rotations.
inline constexpr double kUntiedControlTol = 1e-3;
/// Off-diagonal mixing must break a square by more than this.
inline constexpr double kOffDiagonalControlTol = 1e-6;

/// Y(g) o eta == eta o X(g) for random (tau, gain, arrow); every arrow of
/// the sensor poset is used at least once.
CheckResult check_core_naturality(const Model& model, std::size_t trials, std::uint64_t seed);

/// Block-diagonal TOTAL maps satisfy the squares at the ACC and GYR
/// injections: random dense per-sensor maps and the model's own Stage-2
/// branches.
CheckResult check_poset_naturality_equivalence(const Model& model, std::uint64_t seed);

/// Negative control: a TOTAL map with an off-diagonal block `scale * I`
/// evaluated on unit inputs. Expected to fail.
CheckResult check_offdiagonal_control(std::uint64_t seed, double scale = 1.0);

/// z(Rx) = z(x) for rotations and reflections, z(shift x) = z(x) for every
/// tau, and z(gain x) - z(x) = (0, ..., 0, log g_acc, log g_gyr).
CheckResult check_readout_invariance(const Model& model, std::size_t trials, std::uint64_t seed);

/// GN(shift x) == shift GN(x) for tau in {0, 1, T-1} plus random taus.
CheckResult check_gn_shift_commutation(std::size_t trials, std::uint64_t seed);

/// ||N(l x) - N(x)|| against its closed form, including floor-active cases.
CheckResult check_norm_floor_equality(std::size_t trials, std::uint64_t seed, double epsilon);

/// Negative control: the readout check restricted to rotations on a model
/// with untied Stage-1 banks. Expected to fail.
CheckResult check_untied_control(const ModelSpec& spec, std::uint64_t seed);

struct VerifyConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t trials = 6;
  bool include_controls = true;
};

struct VerifySummary {
  std::vector<CheckResult> results;

  bool ok() const;
  nlohmann::json to_json() const;
};

VerifySummary run_all(const Model& model, const VerifyConfig& cfg = {});
void print_table(const VerifySummary& summary, std::ostream& os);

}  // namespace catequiv::verify
