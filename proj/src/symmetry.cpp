// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "catequiv/symmetry.hpp"

#include <stdexcept>
#include <string>

#include "catequiv/ops.hpp"

namespace catequiv::symmetry {
namespace {

bool is_axis(PosetObject s) { return static_cast<int>(s) < 6; }

// Axis index within its sensor (0..2) for axis objects.
std::size_t axis_index(PosetObject s) { return static_cast<std::size_t>(s) % 3; }

bool owned_by_acc(PosetObject s) {
  return s == PosetObject::kAcc ||
         (is_axis(s) && static_cast<int>(s) < 3);
}

void check_rows(const Tensor& x, PosetObject s, std::size_t features,
                const char* op) {
  if (features == 0) throw std::invalid_argument(std::string(op) + ": zero features");
  if (x.rank() != 2 || x.dim(0) != channel_count(s) * features) {
    throw core::ShapeError(std::string(op) + ": tensor " + core::to_string(x.shape()) +
                           " does not live over " + std::string(name(s)) +
                           " with " + std::to_string(features) +
                           " feature rows per channel");
  }
}

}  // namespace

std::string_view name(PosetObject s) {
  switch (s) {
    case PosetObject::kAccX: return "ACCx";
    case PosetObject::kAccY: return "ACCy";
    case PosetObject::kAccZ: return "ACCz";
    case PosetObject::kGyrX: return "GYRx";
    case PosetObject::kGyrY: return "GYRy";
    case PosetObject::kGyrZ: return "GYRz";
    case PosetObject::kAcc: return "ACC";
    case PosetObject::kGyr: return "GYR";
    case PosetObject::kTotal: return "TOTAL";
  }
  return "?";
}

std::size_t channel_count(PosetObject s) {
  if (is_axis(s)) return 1;
  if (s == PosetObject::kTotal) return 6;
  return 3;
}

Sensor channel_sensor(PosetObject s, std::size_t c) {
  if (c >= channel_count(s)) throw std::out_of_range("channel_sensor: channel index");
  if (s == PosetObject::kTotal) return c < 3 ? Sensor::kAcc : Sensor::kGyr;
  return owned_by_acc(s) ? Sensor::kAcc : Sensor::kGyr;
}

bool precedes(PosetObject s, PosetObject t) {
  if (s == t || t == PosetObject::kTotal) return true;
  if (!is_axis(s)) return false;
  return (t == PosetObject::kAcc && owned_by_acc(s)) ||
         (t == PosetObject::kGyr && !owned_by_acc(s));
}

std::vector<std::pair<PosetObject, PosetObject>> all_arrows() {
  std::vector<std::pair<PosetObject, PosetObject>> arrows;
  for (PosetObject s : kAllObjects) {
    for (PosetObject t : kAllObjects) {
      if (precedes(s, t)) arrows.emplace_back(s, t);
    }
  }
  return arrows;
}

std::size_t block_offset(PosetObject s, PosetObject t) {
  if (!precedes(s, t)) {
    throw std::invalid_argument("block_offset: " + std::string(name(s)) +
                                " is not below " + std::string(name(t)));
  }
  if (s == t) return 0;
  if (is_axis(s)) {
    return t == PosetObject::kTotal ? static_cast<std::size_t>(s) : axis_index(s);
  }
  return s == PosetObject::kAcc ? 0 : 3;
}

Morphism compose(const Morphism& second, const Morphism& first,
                 std::size_t period) {
  if (first.target != second.source) {
    throw std::invalid_argument("compose: arrows are not composable (" +
                                std::string(name(first.target)) + " vs " +
                                std::string(name(second.source)) + ")");
  }
  if (period == 0) throw std::invalid_argument("compose: zero period");
  const long p = static_cast<long>(period);
  long tau = (first.tau + second.tau) % p;
  if (tau < 0) tau += p;
  return {tau,
          {second.gain.acc * first.gain.acc, second.gain.gyr * first.gain.gyr},
          first.source,
          second.target};
}

Tensor apply_time_gain(const Tensor& x, PosetObject s, long tau, Gain gain,
                       std::size_t features) {
  check_rows(x, s, features, "apply_time_gain");
  if (!(gain.acc > 0.0) || !(gain.gyr > 0.0)) {
    throw std::invalid_argument("apply_time_gain: gains must be positive");
  }
  Tensor out = core::ops::shift_time(x, tau);
  const std::size_t length = x.dim(1);
  for (std::size_t r = 0; r < x.dim(0); ++r) {
    const double g = gain.of(channel_sensor(s, r / features));
    for (std::size_t t = 0; t < length; ++t) out[r * length + t] *= g;
  }
  return out;
}

Tensor inject(const Tensor& x, PosetObject s, PosetObject t,
              std::size_t features) {
  check_rows(x, s, features, "inject");
  if (!precedes(s, t)) {
    throw std::invalid_argument("inject: no arrow " + std::string(name(s)) +
                                " -> " + std::string(name(t)));
  }
  const std::size_t length = x.dim(1);
  Tensor out({channel_count(t) * features, length}, 0.0);
  const std::size_t row0 = block_offset(s, t) * features;
  for (std::size_t i = 0; i < x.size(); ++i) out[row0 * length + i] = x[i];
  return out;
}

Tensor apply_morphism(const Tensor& x, const Morphism& m, std::size_t features) {
  return inject(apply_time_gain(x, m.source, m.tau, m.gain, features), m.source,
                m.target, features);
}

Tensor apply_morphism_inject_first(const Tensor& x, const Morphism& m,
                                   std::size_t features) {
  return apply_time_gain(inject(x, m.source, m.target, features), m.target,
                         m.tau, m.gain, features);
}

}  // namespace catequiv::symmetry
