#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "tidenav/error.hpp"
#include "tidenav/tide_field.hpp"

using namespace tidenav;

namespace {

DepthFieldConfig flat(double depth, double amplitude = 0.0) {
  DepthFieldConfig c;
  c.extent = {0.0, 80.0};
  c.bathymetry = PiecewiseLinear(depth);
  c.amplitude = PiecewiseLinear(amplitude);
  return c;
}

}  // namespace

TEST(DepthField, ConstantBedWithoutTide) {
  const DepthField f(flat(10.0));
  for (double p : {0.0, 13.7, 80.0}) {
    for (double t : {0.0, 3.3, 100.0}) EXPECT_DOUBLE_EQ(f.depth_at(p, t), 10.0);
  }
}

TEST(DepthField, TidePeaksAtQuarterPeriod) {
  const DepthField f(flat(10.0, 1.5));
  EXPECT_NEAR(f.depth_at(20.0, f.period() / 4.0), 11.5, 1e-12);
  EXPECT_NEAR(f.depth_at(20.0, 3.0 * f.period() / 4.0), 8.5, 1e-12);
}

TEST(DepthField, NoiseFreeFieldIsPeriodic) {
  auto c = flat(9.0, 1.0);
  c.shoals = {{30.0, 2.0, 1.0, 4.0}};
  c.phase = PiecewiseLinear({{0.0, 0.0}, {80.0, 1.0}});
  const DepthField f(c);
  for (double p = 0.0; p <= 80.0; p += 3.1) {
    for (double t = 0.0; t < 30.0; t += 1.7) {
      EXPECT_NEAR(f.depth_at(p, t), f.depth_at(p, t + f.period()), 1e-9);
    }
  }
}

TEST(DepthField, NoiseIsRepeatableAndPerturbsLevel) {
  auto c = flat(10.0);
  c.noise_sd_m = 0.2;
  const DepthField f(c);
  EXPECT_EQ(f.depth_at(5.0, 2.5), f.depth_at(5.0, 2.5));
  EXPECT_DOUBLE_EQ(f.depth_at(5.0, 2.5) - f.depth_at(40.0, 2.5), 0.0);
  EXPECT_NE(f.water_level_noise(2.5), f.water_level_noise(2.6));
  EXPECT_DOUBLE_EQ(f.without_noise().depth_at(5.0, 2.5), 10.0);
}

TEST(DepthField, RejectsInvalidConfig) {
  auto c = flat(10.0);
  c.period_h = 0.0;
  EXPECT_THROW(DepthField{c}, DomainError);
  c = flat(10.0, -1.0);
  EXPECT_THROW(DepthField{c}, DomainError);
  c = flat(10.0);
  c.noise_sd_m = -0.1;
  EXPECT_THROW(DepthField{c}, DomainError);
}

TEST(IslandRegion, DeepWaterHasNoViolation) {
  EXPECT_TRUE(extract_island_region(DepthField(flat(10.0)), 7.0, 1.0).empty());
}

TEST(IslandRegion, GaussianDipMatchesAnalyticEndpoints) {
  // depth 10 - 4 exp(-(p-40)^2 / 8) crosses 7 m where (p-40)^2 = 8 ln(4/3).
  auto c = flat(10.0);
  c.shoals = {{40.0, 4.0, std::sqrt(8.0), 2.0}};
  c.grid_km = 0.01;
  const auto parts = extract_island_region(DepthField(c), 7.0, 0.0);
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_TRUE(parts[0].contains(40.0));
  const double half = std::sqrt(8.0 * std::log(4.0 / 3.0));
  EXPECT_NEAR(parts[0].lo, 40.0 - half, c.grid_km);
  EXPECT_NEAR(parts[0].hi, 40.0 + half, c.grid_km);
}

TEST(IslandRegion, TwoDipsGiveTwoComponents) {
  auto c = flat(10.0);
  c.shoals = {{20.0, 4.0, 1.0, 2.0}, {50.0, 5.0, 2.0, 2.0}};
  const DepthField f(c);
  const auto parts = extract_island_region(f, 7.0, 0.0);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_TRUE(parts[0].contains(20.0));
  EXPECT_TRUE(parts[1].contains(50.0));
  // Grid-scan oracle: every grid point is violating iff it lies in a component.
  for (double p : f.grid()) {
    const bool shallow = f.depth_at(p, 0.0) < 7.0;
    EXPECT_EQ(shallow, parts[0].contains(p) || parts[1].contains(p)) << p;
  }
}

TEST(EnclosingInterval, Examples) {
  const std::vector<double> a{2.0, 3.0, 7.0};
  const auto e = enclosing_interval(a);
  EXPECT_DOUBLE_EQ(e.center, 4.5);
  EXPECT_DOUBLE_EQ(e.radius, 2.5);
  const std::vector<double> b{5.0};
  EXPECT_DOUBLE_EQ(enclosing_interval(b).center, 5.0);
  EXPECT_DOUBLE_EQ(enclosing_interval(b).radius, 0.0);
}

TEST(EnclosingInterval, RandomSetsAreTight) {
  oracle::Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto pts = oracle::uniform_samples(rng, 1 + rng() % 9, -10.0, 10.0);
    const auto e = enclosing_interval(pts);
    bool touches_lo = false, touches_hi = false;
    for (double p : pts) {
      EXPECT_LE(std::abs(p - e.center), e.radius + 1e-12);
      touches_lo |= std::abs(p - (e.center - e.radius)) < 1e-12;
      touches_hi |= std::abs(p - (e.center + e.radius)) < 1e-12;
    }
    // Both ends are attained, so no smaller radius covers the set.
    EXPECT_TRUE(touches_lo && touches_hi);
  }
}

class TimelineTest : public ::testing::Test {
 protected:
  DepthFieldConfig config() const {
    auto c = flat(9.0, 1.0);
    c.shoals = {{20.0, 2.5, 1.0, 6.0}, {50.0, 2.5, 1.0, 6.0}};
    return c;
  }
};

TEST_F(TimelineTest, NoiseFreeObservationsEqualRealized) {
  const DepthField f(config());
  const auto islands = find_islands(f, 7.0);
  ASSERT_EQ(islands.size(), 2u);
  const TimeGrid grid{5 * f.period(), 0.2, 70};
  const auto tl = build_obstacle_timeline(f, 7.0, 1, grid, 4);
  EXPECT_EQ(tl.steps(), 70u);
  EXPECT_EQ(tl.sample_count(), 4u);
  bool some_positive = false, some_zero = false;
  for (std::size_t k = 0; k < tl.steps(); ++k) {
    EXPECT_DOUBLE_EQ(tl.center_km, islands[0].center_km);
    some_positive |= tl.realized_radius[k] > 0.0;
    some_zero |= tl.realized_radius[k] == 0.0;
    for (double o : tl.observation_sets[k]) EXPECT_NEAR(o, tl.realized_radius[k], 1e-12);
  }
  // Over a full period the bar is exposed at low water and covered at high water.
  EXPECT_TRUE(some_positive);
  EXPECT_TRUE(some_zero);
}

TEST_F(TimelineTest, CoveredIslandHasZeroRadius) {
  const DepthField f(config());
  // High water: the bar top sits at 6.5 + 1 m, above the 7 m draft.
  const TimeGrid grid{5 * f.period() + f.period() / 4.0, 0.1, 1};
  const auto tl = build_obstacle_timeline(f, 7.0, 2, grid, 3);
  EXPECT_EQ(tl.realized_radius[0], 0.0);
}

TEST_F(TimelineTest, NoisyObservationsSpread) {
  auto c = config();
  c.noise_sd_m = 0.3;
  c.shoals = {{20.0, 2.5, 2.0, 2.0}};
  const DepthField f(c);
  const double T = f.period();
  // Near low water the Gaussian bar's width responds smoothly to the level.
  const TimeGrid grid{10 * T + 0.75 * T - 0.5, 0.1, 10};
  const auto tl = build_obstacle_timeline(f, 7.0, 1, grid, 8);
  for (std::size_t k = 0; k < tl.steps(); ++k) {
    EXPECT_GT(oracle::sample_sd(tl.observation_sets[k]), 0.0) << k;
    for (double o : tl.observation_sets[k]) EXPECT_GE(o, 0.0);
  }
}

TEST(Empirical, AtomsAndWeights) {
  const EmpiricalDistribution a({1.0, 2.0});
  EXPECT_EQ(a.size(), 2u);
  EXPECT_DOUBLE_EQ(a.weight(), 0.5);
  EXPECT_DOUBLE_EQ(a.mean(), 1.5);
  const EmpiricalDistribution b({3.0});
  EXPECT_DOUBLE_EQ(b.weight(), 1.0);
  EXPECT_DOUBLE_EQ(b.max(), 3.0);
  EXPECT_THROW(EmpiricalDistribution(std::vector<double>{}), DomainError);
}

TEST(Empirical, MeanOfRandomSamples) {
  oracle::Rng rng(8);
  const auto s = oracle::uniform_samples(rng, 17, 0.0, 4.0);
  double m = 0.0;
  for (double v : s) m += v;
  EXPECT_NEAR(empirical_distribution(s).mean(), m / 17.0, 1e-12);
}

TEST(HashedNormal, DeterministicAndRoughlyStandard) {
  EXPECT_EQ(hashed_normal(1, 2, 3), hashed_normal(1, 2, 3));
  EXPECT_NE(hashed_normal(1, 2, 3), hashed_normal(1, 2, 4));
  double s = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const double z = hashed_normal(42, 0, k);
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.05);
  EXPECT_NEAR(s2 / n, 1.0, 0.05);
}

TEST(DepthField, LargerAmplitudeNeverShrinksIslandsBelowMeanLevel) {
  // sin(2 pi t / T) < 0 on the second half of each period: a larger amplitude lowers the
  // water further there, so islands can only grow.
  auto field_with = [](double amp) {
    auto c = flat(9.0, amp);
    c.shoals = {{20.0, 1.6, 1.0, 2.0}, {50.0, 1.2, 0.8, 8.0}};
    return DepthField(c);
  };
  const auto islands = find_islands(field_with(1.3), 7.0);
  ASSERT_EQ(islands.size(), 2u);
  std::vector<std::vector<double>> radii;
  for (double amp : {0.6, 0.8, 1.0, 1.3}) {
    const auto f = field_with(amp);
    const double T = f.period();
    std::vector<double> r;
    for (const auto& is : islands) {
      const RadiusProbe probe(f, is, 7.0);
      for (double t = 0.5 * T + 0.05; t < T; t += 0.1) r.push_back(probe.noiseless_radius_at(t));
    }
    radii.push_back(std::move(r));
  }
  for (std::size_t a = 1; a < radii.size(); ++a) {
    for (std::size_t i = 0; i < radii[a].size(); ++i) EXPECT_GE(radii[a][i], radii[a - 1][i]) << i;
  }
}

TEST(DepthField, TimelinesAreBitIdenticalAcrossBuilds) {
  auto c = flat(9.0, 1.0);
  c.noise_sd_m = 0.2;
  c.shoals = {{30.0, 2.2, 1.0, 4.0}};
  const TimeGrid grid{20 * c.period_h, 0.1, 40};
  const auto a = build_obstacle_timeline(DepthField(c), 7.0, 1, grid, 6);
  const auto b = build_obstacle_timeline(DepthField(c), 7.0, 1, grid, 6);
  EXPECT_EQ(a.realized_radius, b.realized_radius);
  EXPECT_EQ(a.observation_sets, b.observation_sets);
}
