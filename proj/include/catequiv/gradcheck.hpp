// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#pragma once

#include <cstddef>
#include <functional>

#include "catequiv/autodiff.hpp"

namespace catequiv::core {

/// A scalar function of one tensor argument, built on a caller-owned tape.
using ScalarFn = std::function<Var(Tape&, Var)>;

struct GradCheckResult {
  /// max over coordinates of |analytic - numeric| / max(1, |analytic|)
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  /// False when f(theta) or any perturbed evaluation was not finite.
  bool finite = true;

  bool passed(double tolerance) const {
    return finite && max_rel_error < tolerance;
  }
};

/// Compares the tape gradient of f at theta with central differences of
/// the given step. f must be deterministic.
GradCheckResult grad_check(const ScalarFn& f, const Tensor& theta,
                           double step = 1e-5);

}  // namespace catequiv::core
