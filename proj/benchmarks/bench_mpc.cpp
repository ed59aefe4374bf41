#include <benchmark/benchmark.h>

#include "tidenav/mpc.hpp"
#include "tidenav/sim.hpp"

using namespace tidenav;

namespace {

MpcSetup cruise(int K) {
  MpcSetup s;
  s.horizon = K;
  s.initial_state = 2.0;
  s.previous_input = 10.0;
  for (int k = 0; k <= K; ++k) s.reference.push_back(2.0 + 1.0 * k);
  return s;
}

ObstacleTimeline island(int id, double center, std::vector<double> obs) {
  ObstacleTimeline tl;
  tl.id = id;
  tl.center_km = center;
  tl.grid = {0.0, 0.1, 12};
  tl.realized_radius.assign(12, 0.0);
  tl.observation_sets.assign(12, std::move(obs));
  return tl;
}

void BM_MpcStepFree(benchmark::State& state) {
  const auto setup = cruise(10);
  for (auto _ : state) benchmark::DoNotOptimize(dr_mpc_step(setup, {}, 0, {0.95, 0.02, 0.001}));
}
BENCHMARK(BM_MpcStepFree);

void BM_MpcStepTwoIslands(benchmark::State& state) {
  const auto setup = cruise(10);
  const std::vector<ObstacleTimeline> obs{island(1, 5.2, {0.5, 0.55, 0.0, 0.55}),
                                          island(2, 9.1, {0.3, 0.6, 0.45})};
  for (auto _ : state) benchmark::DoNotOptimize(dr_mpc_step(setup, obs, 0, {0.95, 0.02, 0.001}));
}
BENCHMARK(BM_MpcStepTwoIslands);

void BM_ClosedLoopDefaultScenario(benchmark::State& state) {
  auto c = default_scenario();
  c.pool_size = 40;
  const Scenario s(c);
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(s, c.controller, 11, seed++));
}
BENCHMARK(BM_ClosedLoopDefaultScenario)->Unit(benchmark::kMillisecond);

}  // namespace
