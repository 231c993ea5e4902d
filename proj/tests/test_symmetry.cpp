// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include <gtest/gtest.h>

#include "catequiv/ops.hpp"
#include "catequiv/rng.hpp"
#include "catequiv/symmetry.hpp"

namespace catequiv::symmetry {
namespace {

using core::Rng;
using core::Tensor;
using P = PosetObject;

Tensor random_tensor(std::size_t rows, std::size_t len, Rng& rng) {
  Tensor t({rows, len});
  for (double& v : t.data()) v = rng.normal();
  return t;
}

Morphism random_morphism(P s, P t, std::size_t len, Rng& rng) {
  return {rng.uniform_int(0, static_cast<std::int64_t>(len) - 1),
          {rng.uniform(0.2, 5.0), rng.uniform(0.2, 5.0)},
          s,
          t};
}

TEST(PosetTest, ArrowCount) {
  // 9 identities, 6 axis->sensor, 2 sensor->TOTAL, 6 axis->TOTAL.
  EXPECT_EQ(all_arrows().size(), 23u);
  EXPECT_TRUE(precedes(P::kAccY, P::kAcc));
  EXPECT_TRUE(precedes(P::kGyrZ, P::kTotal));
  EXPECT_FALSE(precedes(P::kAccX, P::kGyr));
  EXPECT_FALSE(precedes(P::kAcc, P::kGyr));
  EXPECT_FALSE(precedes(P::kTotal, P::kAcc));
  EXPECT_FALSE(precedes(P::kAccX, P::kAccY));
}

TEST(PosetTest, CarrierSizes) {
  EXPECT_EQ(channel_count(P::kGyrX), 1u);
  EXPECT_EQ(channel_count(P::kAcc), 3u);
  EXPECT_EQ(channel_count(P::kTotal), 6u);
}

TEST(ActionTest, IdentityMorphism) {
  Rng rng(1);
  const Tensor x = random_tensor(6, 16, rng);
  EXPECT_EQ(apply_morphism(x, Morphism::identity(P::kTotal)).values(), x.values());
}

TEST(ActionTest, BlockScaling) {
  const Tensor x({6, 4}, 1.0);
  const Tensor y = apply_time_gain(x, P::kTotal, 0, {2.0, 3.0});
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t t = 0; t < 4; ++t) EXPECT_EQ(y.at(r, t), r < 3 ? 2.0 : 3.0);
}

TEST(ActionTest, RejectsNonPositiveGain) {
  EXPECT_THROW(apply_time_gain(Tensor({3, 4}), P::kAcc, 0, {0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(apply_time_gain(Tensor({3, 4}), P::kAcc, 0, {1.0, -2.0}), std::invalid_argument);
}

TEST(ActionTest, CompositionMatchesSequentialApplication) {
  Rng rng(2);
  const Tensor x = random_tensor(6, 16, rng);
  const Morphism first{3, {2.0, 1.0}, P::kTotal, P::kTotal};
  const Morphism second{5, {0.5, 4.0}, P::kTotal, P::kTotal};
  const Morphism both = compose(second, first, 16);
  EXPECT_EQ(both.tau, 8);
  EXPECT_EQ(both.gain.acc, 1.0);
  EXPECT_EQ(both.gain.gyr, 4.0);
  const Tensor seq = apply_morphism(apply_morphism(x, first), second);
  EXPECT_LE(core::max_abs_diff(seq, apply_morphism(x, both)), 1e-12);
}

TEST(ActionTest, ComposeRejectsMismatchedArrows) {
  EXPECT_THROW(compose(Morphism::identity(P::kGyr), Morphism::identity(P::kAcc), 8),
               std::invalid_argument);
}

TEST(ActionTest, GroupLaws) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Morphism a = random_morphism(P::kTotal, P::kTotal, 16, rng);
    const Morphism b = random_morphism(P::kTotal, P::kTotal, 16, rng);
    const Morphism c = random_morphism(P::kTotal, P::kTotal, 16, rng);
    const Morphism l = compose(c, compose(b, a, 16), 16);
    const Morphism r = compose(compose(c, b, 16), a, 16);
    EXPECT_EQ(l.tau, r.tau);
    // Real multiplication is not associative bit-for-bit; compare tightly.
    EXPECT_NEAR(l.gain.acc, r.gain.acc, 1e-12 * l.gain.acc);
    EXPECT_NEAR(l.gain.gyr, r.gain.gyr, 1e-12 * l.gain.gyr);
    const Morphism id = Morphism::identity(P::kTotal);
    EXPECT_EQ(compose(a, id, 16).tau, a.tau);
    EXPECT_EQ(compose(id, a, 16).gain.acc, a.gain.acc);
  }
}

TEST(ActionTest, ShiftAndGainCommute) {
  Rng rng(4);
  const Tensor x = random_tensor(6, 16, rng);
  const Tensor a = apply_time_gain(apply_time_gain(x, P::kTotal, 5, {}), P::kTotal, 0, {1.5, 0.25});
  const Tensor b = apply_time_gain(apply_time_gain(x, P::kTotal, 0, {1.5, 0.25}), P::kTotal, 5, {});
  EXPECT_EQ(a.values(), b.values());
}

TEST(ActionTest, Functoriality) {
  Rng rng(5);
  const auto arrows = all_arrows();
  for (int i = 0; i < 100; ++i) {
    const auto [s, t] = arrows[static_cast<std::size_t>(rng.uniform_int(0, 22))];
    // Pick u with t <= u.
    std::vector<P> ups;
    for (P u : kAllObjects)
      if (precedes(t, u)) ups.push_back(u);
    const P u = ups[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(ups.size()) - 1))];
    const Morphism m1 = random_morphism(s, t, 16, rng);
    const Morphism m2 = random_morphism(t, u, 16, rng);
    const Tensor x = random_tensor(channel_count(s) * 2, 16, rng);
    const Tensor lhs = apply_morphism(x, compose(m2, m1, 16), 2);
    const Tensor rhs = apply_morphism(apply_morphism(x, m1, 2), m2, 2);
    EXPECT_LE(core::max_abs_diff(lhs, rhs), 1e-12);
  }
}

TEST(InjectTest, AxisIntoSensor) {
  const Tensor v({1, 4}, {1, 2, 3, 4});
  const Tensor y = inject(v, P::kAccX, P::kAcc);
  EXPECT_EQ(y.values(), (std::vector<double>{1, 2, 3, 4, 0, 0, 0, 0, 0, 0, 0, 0}));
}

TEST(InjectTest, SensorIntoTotal) {
  const Tensor y = inject(Tensor({3, 5}, 1.0), P::kAcc, P::kTotal);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t t = 0; t < 5; ++t) EXPECT_EQ(y.at(r, t), r < 3 ? 1.0 : 0.0);
  const Tensor g = inject(Tensor({3, 5}, 1.0), P::kGyr, P::kTotal);
  EXPECT_EQ(g.at(0, 0), 0.0);
  EXPECT_EQ(g.at(3, 0), 1.0);
}

TEST(InjectTest, CompositeEqualsDirect) {
  Rng rng(6);
  for (P axis : {P::kAccX, P::kAccY, P::kAccZ, P::kGyrX, P::kGyrY, P::kGyrZ}) {
    const P sensor = static_cast<int>(axis) < 3 ? P::kAcc : P::kGyr;
    const Tensor x = random_tensor(1, 8, rng);
    EXPECT_EQ(inject(inject(x, axis, sensor), sensor, P::kTotal).values(),
              inject(x, axis, P::kTotal).values());
  }
  const Tensor y = inject(Tensor({1, 2}, {7, 8}), P::kAccY, P::kTotal);
  EXPECT_EQ(y.at(1, 0), 7.0);
}

TEST(InjectTest, RejectsNonArrows) {
  EXPECT_THROW(inject(Tensor({3, 4}), P::kAcc, P::kGyr), std::invalid_argument);
  EXPECT_THROW(inject(Tensor({2, 4}), P::kAcc, P::kTotal), core::ShapeError);
}

TEST(MorphismTest, HandExample) {
  // (tau = 1, gain (2, 1), ACCx -> ACC) on [1, 0, 0, 0].
  const Morphism m{1, {2.0, 1.0}, P::kAccX, P::kAcc};
  const Tensor y = apply_morphism(Tensor({1, 4}, {1, 0, 0, 0}), m);
  EXPECT_EQ(y.values(), (std::vector<double>{0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}));
}

TEST(MorphismTest, BothOrdersAgreeExactly) {
  Rng rng(7);
  const auto arrows = all_arrows();
  for (int i = 0; i < 200; ++i) {
    const auto [s, t] = arrows[static_cast<std::size_t>(rng.uniform_int(0, 22))];
    const Morphism m = random_morphism(s, t, 12, rng);
    const Tensor x = random_tensor(channel_count(s), 12, rng);
    ASSERT_EQ(apply_morphism(x, m).values(), apply_morphism_inject_first(x, m).values());
  }
}

}  // namespace
}  // namespace catequiv::symmetry
