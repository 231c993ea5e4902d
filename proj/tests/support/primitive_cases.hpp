// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#pragma once

#include <string>
#include <vector>

#include "catequiv/autodiff.hpp"
#include "catequiv/gradcheck.hpp"
#include "catequiv/ops.hpp"
#include "catequiv/rng.hpp"

namespace catequiv::testing {

// Every tape primitive composed with a fixed random projection to a
// scalar. Shared by the unit tests and the acceptance run.
struct PrimitiveCase {
  std::string name;
  core::Tensor theta;
  core::ScalarFn f;
};

inline constexpr int kPrimitiveCaseCount = 14;

inline core::Tensor random_tensor(core::Shape shape, core::Rng& rng) {
  core::Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.normal();
  return t;
}

inline core::Var project(core::Tape& tape, core::Var y, std::uint64_t seed) {
  core::Rng rng(seed);
  core::Tensor p(y.shape());
  for (double& v : p.data()) v = rng.normal();
  return core::ops::sum(core::ops::mul(y, tape.constant(p)));
}

inline PrimitiveCase primitive_case(int which) {
  using core::Rng;
  using core::ScalarFn;
  using core::Tape;
  using core::Tensor;
  using core::Var;
  using core::ops::Padding;
  namespace ops = core::ops;
  static const char* const kNames[kPrimitiveCaseCount] = {
      "conv1d_input", "conv1d_weight", "add_sub_mul", "relu_scale", "l2_norm",
      "mean", "slice_concat_reshape_tile_gap", "channel_bias", "affine",
      "group_norm_input", "group_norm_gamma", "group_norm_beta",
      "weighted_cross_entropy", "dropout"};
  Rng rng(100 + which);
  Tensor theta;
  ScalarFn f;
  const Tensor other = random_tensor({4, 12}, rng);
  switch (which) {
    case 0:  // conv1d input, circular, grouped, dilated
      theta = random_tensor({4, 12}, rng);
      f = [w = random_tensor({6, 2, 3}, rng)](Tape& t, Var x) {
        return project(t, ops::conv1d(x, t.constant(w), {2, 2, Padding::kCircular}), 1);
      };
      break;
    case 1:  // conv1d weight, zero padding
      theta = random_tensor({6, 2, 5}, rng);
      f = [other](Tape& t, Var w) {
        return project(t, ops::conv1d(t.constant(other), w, {2, 1, Padding::kZero}), 2);
      };
      break;
    case 2:
      theta = random_tensor({4, 12}, rng);
      f = [other](Tape& t, Var x) {
        return project(t, ops::sub(ops::add(x, t.constant(other)), ops::mul(x, x)), 3);
      };
      break;
    case 3:
      theta = random_tensor({4, 12}, rng);
      f = [](Tape& t, Var x) { return project(t, ops::relu(ops::scale(x, 1.7)), 4); };
      break;
    case 4:
      theta = random_tensor({2, 3, 4, 5}, rng);
      f = [](Tape& t, Var x) { return project(t, ops::l2_norm(x, 1), 5); };
      break;
    case 5:
      theta = random_tensor({2, 3, 5}, rng);
      f = [](Tape& t, Var x) { return project(t, ops::mean(x, 0), 6); };
      break;
    case 6:
      theta = random_tensor({4, 12}, rng);
      f = [](Tape& t, Var x) {
        Var parts = ops::concat({ops::slice_rows(x, 1, 3), ops::slice_rows(x, 0, 1)});
        return project(t, ops::gap_time(ops::tile(ops::reshape(parts, {3, 12}), 2)), 7);
      };
      break;
    case 7:
      theta = random_tensor({4}, rng);
      f = [other](Tape& t, Var b) { return project(t, ops::add_channel_bias(t.constant(other), b), 8); };
      break;
    case 8:
      theta = random_tensor({3, 5}, rng);
      f = [z = random_tensor({5}, rng), b = random_tensor({3}, rng)](Tape& t, Var w) {
        return project(t, ops::affine(w, t.constant(z), t.constant(b)), 9);
      };
      break;
    case 9:  // GroupNorm input
      theta = random_tensor({4, 12}, rng);
      f = [g = random_tensor({4}, rng), b = random_tensor({4}, rng)](Tape& t, Var x) {
        return project(t, ops::group_norm(x, 2, t.constant(g), t.constant(b)), 10);
      };
      break;
    case 10:  // GroupNorm gamma
      theta = random_tensor({4}, rng);
      f = [other, b = random_tensor({4}, rng)](Tape& t, Var g) {
        return project(t, ops::group_norm(t.constant(other), 2, g, t.constant(b)), 11);
      };
      break;
    case 11:  // GroupNorm beta
      theta = random_tensor({4}, rng);
      f = [other, g = random_tensor({4}, rng)](Tape& t, Var b) {
        return project(t, ops::group_norm(t.constant(other), 2, t.constant(g), b), 12);
      };
      break;
    case 12:
      theta = random_tensor({6}, rng);
      f = [](Tape&, Var z) { return ops::weighted_cross_entropy(z, 2, 0.8); };
      break;
    case 13:
      theta = random_tensor({4, 12}, rng);
      f = [](Tape& t, Var x) {
        Rng mask(77);
        return project(t, ops::dropout(x, 0.3, true, &mask), 13);
      };
      break;
    default:
      throw std::out_of_range("primitive_case: index");
  }
  return {kNames[which], std::move(theta), std::move(f)};
}

}  // namespace catequiv::testing
