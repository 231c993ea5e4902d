// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// The symmetry category of inertial windows: one-object group part
// (cyclic time shift x per-sensor positive gain) times the sensor hierarchy
// poset  ACC_a < ACC < TOTAL,  GYR_a < GYR < TOTAL.
//
// A tensor "over object s" has C_s * F rows and T columns, where C_s is the
// carrier channel count of s (1, 3 or 6) and F >= 1 is the number of
// feature rows attached to every carrier channel (F = 1 for raw data).

#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "catequiv/tensor.hpp"

namespace catequiv::symmetry {

using core::Tensor;

enum class PosetObject {
  kAccX,
  kAccY,
  kAccZ,
  kGyrX,
  kGyrY,
  kGyrZ,
  kAcc,
  kGyr,
  kTotal,
};

inline constexpr std::array<PosetObject, 9> kAllObjects = {
    PosetObject::kAccX, PosetObject::kAccY, PosetObject::kAccZ,
    PosetObject::kGyrX, PosetObject::kGyrY, PosetObject::kGyrZ,
    PosetObject::kAcc,  PosetObject::kGyr,  PosetObject::kTotal};

enum class Sensor { kAcc, kGyr };

std::string_view name(PosetObject s);
std::size_t channel_count(PosetObject s);
/// Sensor owning carrier channel `c` of object `s`.
Sensor channel_sensor(PosetObject s, std::size_t c);

/// s <= t in the poset.
bool precedes(PosetObject s, PosetObject t);
/// All 23 arrows (s, t) with s <= t: 9 identities, 6 axis->sensor,
/// 2 sensor->TOTAL and 6 axis->TOTAL.
std::vector<std::pair<PosetObject, PosetObject>> all_arrows();
/// Row offset (in carrier channels) of s's block inside t.
std::size_t block_offset(PosetObject s, PosetObject t);

struct Gain {
  double acc = 1.0;
  double gyr = 1.0;

  double of(Sensor s) const { return s == Sensor::kAcc ? acc : gyr; }
};

/// Element ((tau, lambda), u: source -> target) of the category.
struct Morphism {
  long tau = 0;
  Gain gain;
  PosetObject source = PosetObject::kTotal;
  PosetObject target = PosetObject::kTotal;

  static Morphism identity(PosetObject s) { return {0, {}, s, s}; }
};

/// second o first; requires first.target == second.source. Shifts add
/// modulo `period`, gains multiply componentwise.
Morphism compose(const Morphism& second, const Morphism& first,
                 std::size_t period);

/// rho_s(lambda) o tau_Delta: every row is shifted cyclically by tau and
/// scaled by the gain of the sensor that owns it.
Tensor apply_time_gain(const Tensor& x, PosetObject s, long tau, Gain gain,
                       std::size_t features = 1);

/// Canonical zero-padded injection of a tensor over s into object t.
Tensor inject(const Tensor& x, PosetObject s, PosetObject t,
              std::size_t features = 1);

/// J_u o S^(source): time/gain action first, then the injection.
Tensor apply_morphism(const Tensor& x, const Morphism& m,
                      std::size_t features = 1);
/// S^(target) o J_u: the other factorisation; agrees with apply_morphism.
Tensor apply_morphism_inject_first(const Tensor& x, const Morphism& m,
                                   std::size_t features = 1);

}  // namespace catequiv::symmetry
