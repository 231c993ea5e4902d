// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "catequiv/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace catequiv::core {
namespace {

double evaluate(const ScalarFn& f, const Tensor& theta) {
  Tape tape(false);
  Var out = f(tape, tape.constant(theta));
  if (out.value().size() != 1) {
    throw ShapeError("grad_check: function must return one element");
  }
  return out.value()[0];
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& f, const Tensor& theta, double step) {
  GradCheckResult result;
  Tape tape(true);
  Var input = tape.variable(theta);
  Var out = f(tape, input);
  if (!out.value().all_finite()) {
    result.finite = false;
    return result;
  }
  tape.backward(out);
  const Tensor analytic = input.grad();

  Tensor probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double original = probe[i];
    probe[i] = original + step;
    const double plus = evaluate(f, probe);
    probe[i] = original - step;
    const double minus = evaluate(f, probe);
    probe[i] = original;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      result.finite = false;
      result.worst_index = i;
      return result;
    }
    const double numeric = (plus - minus) / (2.0 * step);
    const double err =
        std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
    if (err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace catequiv::core
