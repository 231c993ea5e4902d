// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include <gtest/gtest.h>

#include <sstream>

#include "catequiv/ops.hpp"
#include "catequiv/symmetry.hpp"
#include "catequiv/verify.hpp"
#include "support/synthetic.hpp"

namespace catequiv::verify {
namespace {

using symmetry::PosetObject;

const Model& full_model() {
  static const Model m = Model::initialize(model::catequiv_spec(), 42);
  return m;
}

TEST(VerifyTest, CoreNaturality) {
  for (std::uint64_t seed : {1u, 2u}) {
    const CheckResult r = check_core_naturality(full_model(), 3, seed);
    EXPECT_TRUE(r.pass) << r.max_abs_deviation;
    EXPECT_LE(r.max_abs_deviation, kNaturalityTol);
    EXPECT_GE(r.trials, 23u);  // every arrow at least once
  }
}

TEST(VerifyTest, IdentityMorphismIsBitExact) {
  const Model& m = full_model();
  core::Rng rng(3);
  core::Tensor x({3, 128});
  for (double& v : x.data()) v = rng.normal();
  const std::size_t axes[] = {0, 1, 2};
  const symmetry::Morphism id{0, {1.0, 1.0}, PosetObject::kAcc, PosetObject::kAcc};
  const std::size_t f = 128;  // sum of C2
  EXPECT_EQ(symmetry::apply_morphism(m.linear_core(x, axes), id, f).values(),
            m.linear_core(symmetry::apply_morphism(x, id, 1), axes).values());
}

TEST(VerifyTest, PureShiftMatchesConvEquivariance) {
  const Model& m = full_model();
  core::Rng rng(4);
  core::Tensor x({1, 128});
  for (double& v : x.data()) v = rng.normal();
  const std::size_t axes[] = {4};
  const auto lhs = core::ops::shift_time(m.linear_core(x, axes), 5);
  const auto rhs = m.linear_core(core::ops::shift_time(x, 5), axes);
  EXPECT_LT(core::max_abs_diff(lhs, rhs), 1e-12);
}

TEST(VerifyTest, BlockScalingIntoTotal) {
  const Model& m = full_model();
  core::Rng rng(5);
  core::Tensor x({3, 128});
  for (double& v : x.data()) v = rng.normal();
  const std::size_t acc[] = {0, 1, 2};
  const std::size_t all[] = {0, 1, 2, 3, 4, 5};
  const symmetry::Morphism g{0, {2.0, 3.0}, PosetObject::kAcc, PosetObject::kTotal};
  const auto lhs = symmetry::apply_morphism(m.linear_core(x, acc), g, 128);
  const auto rhs = m.linear_core(symmetry::apply_morphism(x, g, 1), all);
  EXPECT_LT(core::max_abs_diff(lhs, rhs), 1e-9);
}

TEST(VerifyTest, PosetEquivalence) {
  const CheckResult r = check_poset_naturality_equivalence(full_model(), 1);
  EXPECT_TRUE(r.pass) << r.max_abs_deviation;
  EXPECT_LE(r.max_abs_deviation, kPosetTol);
}

TEST(VerifyTest, OffDiagonalControlFails) {
  const CheckResult r = check_offdiagonal_control(1);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.expect_pass);
  EXPECT_TRUE(r.ok());
  EXPECT_GE(r.max_abs_deviation, 1.0 - 1e-12);
  EXPECT_GE(check_offdiagonal_control(2, 0.5).max_abs_deviation, 0.5 - 1e-12);
  // without the off-diagonal block the square commutes
  const CheckResult zero = check_offdiagonal_control(3, 0.0);
  EXPECT_TRUE(zero.pass);
  EXPECT_FALSE(zero.ok());
}

TEST(VerifyTest, ReadoutInvariance) {
  const CheckResult r = check_readout_invariance(full_model(), 3, 1);
  EXPECT_TRUE(r.pass) << r.max_abs_deviation;
}

TEST(VerifyTest, GroupNormAndNormFloor) {
  EXPECT_TRUE(check_gn_shift_commutation(20, 1).pass);
  EXPECT_TRUE(check_norm_floor_equality(50, 1, 1e-6).pass);
}

TEST(VerifyTest, UntiedControlFails) {
  const CheckResult r = check_untied_control(model::catequiv_spec(), 1);
  EXPECT_FALSE(r.pass);
  EXPECT_TRUE(r.ok());
  EXPECT_GT(r.max_abs_deviation, kUntiedControlTol);
}

TEST(VerifyTest, ZeroParametersPass) {
  Model m = Model::initialize(testing::small_spec(model::ModelKind::kCatEquiv, 128), 1);
  for (std::size_t i = 0; i < m.params().size(); ++i)
    for (double& v : m.params()[i].data()) v = 0.0;
  VerifyConfig cfg;
  cfg.seeds = {1};
  cfg.trials = 2;
  cfg.include_controls = false;
  const VerifySummary s = run_all(m, cfg);
  EXPECT_TRUE(s.ok());
}

TEST(VerifyTest, RunAllSummary) {
  VerifyConfig cfg;
  cfg.seeds = {7};
  cfg.trials = 2;
  const VerifySummary s = run_all(full_model(), cfg);
  EXPECT_TRUE(s.ok());
  bool saw_control = false;
  for (const auto& r : s.results) saw_control = saw_control || !r.expect_pass;
  EXPECT_TRUE(saw_control);
  std::ostringstream os;
  print_table(s, os);
  EXPECT_NE(os.str().find("naturality"), std::string::npos);
  EXPECT_EQ(s.to_json()["checks"].size(), s.results.size());
}

TEST(VerifyTest, RejectsBaselines) {
  const Model b = Model::initialize(model::circcnn_spec(), 1);
  EXPECT_THROW(check_core_naturality(b, 1, 1), std::invalid_argument);
}

}  // namespace
}  // namespace catequiv::verify
