// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#pragma once

#include <cstdint>
#include <random>

namespace catequiv::core {

/// Seeded random stream backed by std::mt19937_64.
///
/// The engine's output sequence is fixed by the C++ standard. The standard
/// distributions are not, so every transform below is implemented here to
/// keep streams identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal via Box-Muller (the spare value is cached).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  /// Independent child stream keyed by (seed, stream) through splitmix64.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace catequiv::core
