#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tidenav/error.hpp"
#include "tidenav/risk.hpp"

using namespace tidenav;

TEST(SafetyLoss, Examples) {
  const HalfspaceObstacle ob{10.0};
  EXPECT_DOUBLE_EQ(safety_loss(9.0, ob, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(safety_loss(10.0, ob, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(safety_loss(13.0, ob, 2.0), 0.0);
  for (double y : {9.0, 10.0, 13.0}) {
    EXPECT_DOUBLE_EQ(safety_loss_oracle(y, ob, 2.0), safety_loss(y, ob, 2.0));
  }
}

TEST(SafetyLoss, DegenerateObstacle) {
  for (double y : {-3.0, 10.0, 10.5}) EXPECT_EQ(safety_loss(y, HalfspaceObstacle{10.0}, 0.0), 0.0);
}

TEST(SafetyLoss, MatchesProjection) {
  oracle::Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double c = oracle::uniform(rng, -20, 20), y = oracle::uniform(rng, -30, 30),
                 w = oracle::uniform(rng, 0, 10);
    EXPECT_NEAR(safety_loss(y, HalfspaceObstacle{c}, w), oracle::projection_loss(y, c, w), 1e-12);
  }
}

TEST(Cvar, Examples) {
  EXPECT_DOUBLE_EQ(cvar(std::vector<double>{2.5, 2.5, 2.5}, 0.9), 2.5);
  EXPECT_NEAR(cvar(std::vector<double>{0, 0, 0, 4}, 0.75), 4.0, 1e-12);
  EXPECT_NEAR(cvar(std::vector<double>{1, 2, 3, 4}, 0.5), 3.5, 1e-12);
}

TEST(Cvar, MatchesTailAverage) {
  oracle::Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const auto s = oracle::uniform_samples(rng, 1 + rng() % 20, 0.0, 5.0);
    const double alpha = oracle::uniform(rng, 0.05, 0.99);
    EXPECT_NEAR(cvar(s, alpha), oracle::tail_cvar(s, alpha), 1e-10);
  }
}

TEST(Wasserstein, Examples) {
  EXPECT_DOUBLE_EQ(w1_distance(EmpiricalDistribution({1.0}), EmpiricalDistribution({4.5})), 3.5);
  EXPECT_DOUBLE_EQ(w1_distance(EmpiricalDistribution({1, 3}), EmpiricalDistribution({2, 4})), 1.0);
  const EmpiricalDistribution v({0.3, 1.7, 0.9});
  EXPECT_EQ(w1_distance(v, v), 0.0);
}

TEST(Wasserstein, UnequalSizesMatchCdfIntegral) {
  oracle::Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const auto a = oracle::uniform_samples(rng, 1 + rng() % 6, 0.0, 3.0);
    const auto b = oracle::uniform_samples(rng, 1 + rng() % 6, 0.0, 3.0);
    const EmpiricalDistribution A(a), B(b);
    EXPECT_NEAR(w1_distance(A, B), oracle::cdf_w1(a, b), 1e-12);
    EXPECT_NEAR(w1_distance_lp(A, B), oracle::cdf_w1(a, b), 1e-9);
  }
}

TEST(InnerSup, Examples) {
  const EmpiricalDistribution one({2.0});
  const HalfspaceObstacle ob{0.0};
  const auto r = inner_sup_lp(one, 5.0, ob, 0.0, 0.5);
  EXPECT_NEAR(r.value, 0.5, 1e-12);
  EXPECT_EQ(r.certificate.lambda, 1.0);
  EXPECT_NEAR(r.certificate.s[0], 0.0, 1e-12);
  EXPECT_NEAR(inner_sup_closed(one, 5.0, ob, 0.0, 0.5), 0.5, 1e-12);

  const EmpiricalDistribution d({0.5, 1.5, 2.5});
  EXPECT_NEAR(inner_sup_lp(d, 0.0, ob, 0.0, 0.0).value, 1.5, 1e-12);
  EXPECT_NEAR(inner_sup_closed(d, 0.0, ob, 0.0, 0.0), 1.5, 1e-12);
}

TEST(InnerSup, ThetaZeroIsEmpiricalExpectation) {
  oracle::Rng rng(14);
  for (int i = 0; i < 100; ++i) {
    const auto s = oracle::uniform_samples(rng, 1 + rng() % 10, 0.0, 3.0);
    const double c = oracle::uniform(rng, 0, 10), y = oracle::uniform(rng, 0, 10),
                 z = oracle::uniform(rng, -1, 2);
    double expect = 0.0;
    for (double w : s) expect += std::max({w - std::abs(c - y) - z, -z, 0.0});
    expect /= static_cast<double>(s.size());
    const EmpiricalDistribution dist(s);
    EXPECT_NEAR(inner_sup_closed(dist, y, HalfspaceObstacle{c}, z, 0.0), expect, 1e-12);
    EXPECT_NEAR(inner_sup_lp(dist, y, HalfspaceObstacle{c}, z, 0.0).value, expect, 1e-12);
  }
}

TEST(InnerSup, FullLpAgreesWithClosedForm) {
  oracle::Rng rng(15);
  for (int i = 0; i < 60; ++i) {
    const auto s = oracle::uniform_samples(rng, 1 + rng() % 10, 0.0, 3.0);
    const EmpiricalDistribution dist(s);
    const HalfspaceObstacle ob{oracle::uniform(rng, 0, 10)};
    const double y = oracle::uniform(rng, -2, 12), z = oracle::uniform(rng, -1, 3),
                 theta = oracle::uniform(rng, 0, 0.5);
    const auto full = inner_sup_full_lp(dist, y, ob, z, theta);
    EXPECT_NEAR(full.value, inner_sup_closed(dist, y, ob, z, theta), 1e-6);
    EXPECT_GE(full.certificate.lambda, 1.0 - 1e-9);
  }
}

TEST(DrCvar, SingleAtomClosedForm) {
  const EmpiricalDistribution one({2.0});
  for (double d : {0.0, 0.5, 1.99, 2.0, 3.0}) {
    const double expect = std::max(0.0, 2.0 - d) + 0.0005 / 0.05;
    EXPECT_NEAR(dr_cvar_at_distance(one, d, 0.95, 0.0005), expect, 1e-12) << d;
    EXPECT_NEAR(dr_cvar(one, 10.0 + d, HalfspaceObstacle{10.0}, 0.95, 0.0005), expect, 1e-12);
  }
}

TEST(DrCvar, MatchesKinkScanOracle) {
  oracle::Rng rng(16);
  for (int i = 0; i < 500; ++i) {
    const auto s = oracle::uniform_samples(rng, 1 + rng() % 15, 0.0, 3.0);
    const double d = oracle::uniform(rng, 0, 4), alpha = oracle::uniform(rng, 0.5, 0.99),
                 theta = oracle::uniform(rng, 0, 0.01);
    const EmpiricalDistribution dist(s);
    const double v = dr_cvar_at_distance(dist, d, alpha, theta);
    EXPECT_NEAR(v, oracle::worst_case_cvar(s, d, alpha, theta), 1e-10);
    EXPECT_GE(v, theta / (1.0 - alpha) - 1e-9);
    if (theta == 0.0) continue;
    std::vector<double> losses;
    for (double w : s) losses.push_back(std::max(0.0, w - d));
    EXPECT_NEAR(dr_cvar_at_distance(dist, d, alpha, 0.0), oracle::tail_cvar(losses, alpha), 1e-10);
  }
}

TEST(SafeRadius, Examples) {
  const auto r = safe_radius(EmpiricalDistribution({2.0}), {0.95, 0.02, 0.0005});
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.radius, 1.99, 1e-12);

  const EmpiricalDistribution d({0.001, 0.003, 0.002});
  const auto free = safe_radius(d, {0.95, 0.02, 0.0});
  ASSERT_TRUE(free.feasible);
  EXPECT_EQ(free.radius, 0.0);

  EXPECT_FALSE(safe_radius(EmpiricalDistribution({2.0}), {0.95, 0.02, 0.0015}).feasible);
  EXPECT_FALSE(safe_radius_bisection(EmpiricalDistribution({2.0}), {0.95, 0.02, 0.0015}).feasible);
}

TEST(SafeRadius, PointMassWithZeroTolerance) {
  const auto r = safe_radius(EmpiricalDistribution({1.3}), {0.95, 0.0, 0.0});
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.radius, 1.3, 1e-12);
}

TEST(SafeRadius, IsTheLeastFeasibleDistance) {
  oracle::Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    const auto s = oracle::uniform_samples(rng, 1 + rng() % 12, 0.0, 2.0);
    const RiskParams risk{oracle::uniform(rng, 0.5, 0.99), oracle::uniform(rng, 0.0, 0.5),
                          oracle::uniform(rng, 0.0, 0.001)};
    const auto r = safe_radius(EmpiricalDistribution(s), risk);
    if (risk.delta < risk.value_floor()) {
      EXPECT_FALSE(r.feasible);
      continue;
    }
    ASSERT_TRUE(r.feasible);
    EXPECT_LE(oracle::worst_case_cvar(s, r.radius, risk.alpha, risk.theta), risk.delta + 1e-9);
    if (r.radius > 1e-6) {
      EXPECT_GT(oracle::worst_case_cvar(s, r.radius - 1e-6, risk.alpha, risk.theta), risk.delta);
    }
    const auto b = safe_radius_bisection(EmpiricalDistribution(s), risk);
    EXPECT_NEAR(r.radius, b.radius, 1e-8);
  }
}

TEST(SafeRadius, NondecreasingInTheta) {
  const EmpiricalDistribution d({0.0, 0.4, 0.55, 0.55, 0.1, 0.0});
  double prev = -1.0;
  for (double theta = 0.0; theta <= 0.001; theta += 0.0001) {
    const auto r = safe_radius(d, {0.95, 0.02, theta});
    ASSERT_TRUE(r.feasible);
    EXPECT_GE(r.radius, prev - 1e-12);
    prev = r.radius;
  }
}

TEST(SoftRadius, ContinuesPastTheFloor) {
  const EmpiricalDistribution d({0.3, 0.8});
  const RiskParams edge{0.95, 0.02, 0.001};
  const RiskParams beyond{0.95, 0.02, 0.002};
  EXPECT_NEAR(soft_radius(d, beyond), 0.8 + (0.04 - 0.02), 1e-12);
  EXPECT_GT(soft_radius(d, beyond), safe_radius(d, edge).radius);
}

TEST(RiskParams, Validation) {
  EXPECT_THROW((RiskParams{1.0, 0.02, 0.0}.validate()), DomainError);
  EXPECT_THROW((RiskParams{0.0, 0.02, 0.0}.validate()), DomainError);
  EXPECT_THROW((RiskParams{0.95, -0.1, 0.0}.validate()), DomainError);
  EXPECT_THROW((RiskParams{0.95, 0.02, -1e-3}.validate()), DomainError);
  EXPECT_NO_THROW((RiskParams{0.95, 0.0, 0.0}.validate()));
}
