#include "gmmimm/errors.hpp"
#include "gmmimm/filter.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace gmmimm;

TEST(KfPredict, IdentityDynamicsKeepState) {
  const auto s = kf_predict({1.7, 0.3}, {1.0, 0.0, 0.0, 0.0, 1.0}, {2.0, -1.0});
  EXPECT_EQ(s.x, 1.7);
  EXPECT_EQ(s.p, 0.3);
}

TEST(KfPredict, HandComputed) {
  const auto s = kf_predict({1.0, 1.0}, {0.9, 0.05, 0.05, 0.1, 0.09}, {1.0, 1.0});
  EXPECT_NEAR(s.x, 1.0, 1e-15);
  EXPECT_NEAR(s.p, 0.91, 1e-15);
}

TEST(KfPredict, VarianceInflationBound) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2), pos(1e-6, 3);
  for (int i = 0; i < 1000; ++i) {
    const LinearModel m{u(rng), u(rng), u(rng), pos(rng), 1.0};
    EXPECT_GE(kf_predict({u(rng), pos(rng)}, m, {u(rng), u(rng)}).p, m.q);
  }
}

TEST(KfUpdate, ZeroInnovation) {
  const auto out = kf_update({0.4, 2.0}, 0.4, 0.5);
  EXPECT_EQ(out.innovation, 0.0);
  EXPECT_EQ(out.state.x, 0.4);
}

TEST(KfUpdate, HandComputed) {
  const auto out = kf_update({1.0, 0.91}, 1.2, 0.09);
  EXPECT_NEAR(out.innovation_var, 1.0, 1e-15);
  EXPECT_NEAR(out.innovation, 0.2, 1e-15);
  EXPECT_NEAR(out.state.x, 1.182, 1e-15);
  EXPECT_NEAR(out.state.p, 0.0819, 1e-15);
}

TEST(KfUpdate, UninformativeMeasurement) {
  const auto out = kf_update({1.0, 0.5}, 100.0, 1e12);
  EXPECT_NEAR(out.state.x, 1.0, 1e-6);
  EXPECT_NEAR(out.state.p, 0.5, 0.5e-6);
}

TEST(KfUpdate, PosteriorBetweenPriorAndMeasurement) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5, 5), pos(1e-4, 5);
  for (int i = 0; i < 1000; ++i) {
    const FilterState prior{u(rng), pos(rng)};
    const double z = u(rng), r = pos(rng);
    const auto out = kf_update(prior, z, r);
    EXPECT_LT(out.state.p, prior.p);
    EXPECT_GT(out.state.p, 0.0);
    EXPECT_GE(out.state.x, std::min(prior.x, z) - 1e-12);
    EXPECT_LE(out.state.x, std::max(prior.x, z) + 1e-12);
  }
}

TEST(KfUpdate, RejectsInvalidVariances) {
  EXPECT_THROW(kf_update({0.0, 1.0}, 0.0, 0.0), ParameterError);
  EXPECT_THROW(kf_predict({0.0, -1.0}, {}, {}), NumericalError);
  EXPECT_THROW(kf_predict({std::nan(""), 1.0}, {}, {}), NumericalError);
}

TEST(Kalman, MatchesTextbookRecursion) {
  // Oracle: gain-form recursion written out independently.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  const LinearModel m{0.85, 0.1, -0.07, 0.02, 0.05};
  FilterState s{0.0, 1.0};
  double ox = 0.0, op = 1.0, truth = 0.3;
  for (int k = 0; k < 200; ++k) {
    const WheelInput u{2 * n(rng), 2 * n(rng)};
    truth = m.a * truth + m.b1 * u.left + m.b2 * u.right + 0.14 * n(rng);
    const double z = truth + 0.22 * n(rng);
    s = kf_update(kf_predict(s, m, u), z, m.r).state;
    const double xp = m.a * ox + m.b1 * u.left + m.b2 * u.right;
    const double pp = m.a * m.a * op + m.q;
    const double gain = pp / (pp + m.r);
    ox = xp + gain * (z - xp);
    op = (1 - gain) * pp;
    ASSERT_NEAR(s.x, ox, 1e-12) << "step " << k;
    ASSERT_NEAR(s.p, op, 1e-12) << "step " << k;
  }
}
