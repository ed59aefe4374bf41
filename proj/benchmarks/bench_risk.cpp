#include <benchmark/benchmark.h>

#include <random>

#include "tidenav/risk.hpp"

using namespace tidenav;

namespace {

EmpiricalDistribution samples(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return EmpiricalDistribution(std::move(v));
}

void BM_SafeRadius(benchmark::State& state) {
  const auto d = samples(static_cast<std::size_t>(state.range(0)), 1);
  const RiskParams risk{0.95, 0.02, 0.0005};
  for (auto _ : state) benchmark::DoNotOptimize(safe_radius(d, risk));
}
BENCHMARK(BM_SafeRadius)->Arg(1)->Arg(6)->Arg(11)->Arg(100);

void BM_SafeRadiusBisection(benchmark::State& state) {
  const auto d = samples(static_cast<std::size_t>(state.range(0)), 1);
  const RiskParams risk{0.95, 0.02, 0.0005};
  for (auto _ : state) benchmark::DoNotOptimize(safe_radius_bisection(d, risk));
}
BENCHMARK(BM_SafeRadiusBisection)->Arg(11)->Arg(100);

void BM_InnerSupFullLp(benchmark::State& state) {
  const auto d = samples(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(inner_sup_full_lp(d, 0.3, HalfspaceObstacle{0.0}, 0.1, 0.001));
  }
}
BENCHMARK(BM_InnerSupFullLp)->Arg(11)->Arg(50);

void BM_W1Sorted(benchmark::State& state) {
  const auto a = samples(static_cast<std::size_t>(state.range(0)), 3);
  const auto b = samples(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(w1_distance(a, b));
}
BENCHMARK(BM_W1Sorted)->Arg(11)->Arg(1000);

void BM_W1TransportLp(benchmark::State& state) {
  const auto a = samples(static_cast<std::size_t>(state.range(0)), 3);
  const auto b = samples(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(w1_distance_lp(a, b));
}
BENCHMARK(BM_W1TransportLp)->Arg(6)->Arg(11);

}  // namespace
