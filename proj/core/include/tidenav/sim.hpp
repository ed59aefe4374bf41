#pragma once

// Closed-loop Monte-Carlo evaluation of the controllers on a synthetic waterway.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tidenav/mpc.hpp"
#include "tidenav/tide_field.hpp"

namespace tidenav {

struct Waypoint {
  double t_h = 0.0;
  double p_km = 0.0;

  bool operator==(const Waypoint&) const = default;
};

struct ScenarioConfig {
  DepthFieldConfig field{};
  double start_h = 0.0;  // tide clock at the start of the run
  double draft_m = 7.0;
  std::vector<Waypoint> reference{};

  double sample_time_h = 0.1;
  double u_min = 0.0;
  double u_max = 25.0;
  int horizon = 10;
  CostWeights weights{};
  double slack_penalty = 1e6;
  std::optional<double> initial_input{};  // unset: the reference's initial speed

  ControllerSpec controller{};
  std::size_t n_samples = 11;
  std::size_t repetitions = 100;
  std::size_t pool_size = 1200;
  std::uint64_t seed = 1;

  std::vector<double> theta_grid{0.001, 0.00125, 0.0015, 0.00175, 0.002};
  std::vector<std::size_t> n_grid{1, 3, 6, 11};

  void validate() const;
  double duration_h() const { return reference.empty() ? 0.0 : reference.back().t_h; }
  VesselModel vessel() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// The built-in synthetic waterway used when a config file is empty.
ScenarioConfig default_scenario();

/// N-independent scenario data: islands, reference samples and observation pools.
class Scenario {
 public:
  explicit Scenario(ScenarioConfig config);

  const ScenarioConfig& config() const { return config_; }
  const DepthField& field() const { return field_; }
  const std::vector<Island>& islands() const { return islands_; }
  const std::vector<ObservationPool>& pools() const { return pools_; }
  const TimeGrid& grid() const { return grid_; }
  /// Closed-loop steps (duration / sampling time).
  std::size_t steps() const { return steps_; }
  /// Reference position at every step index, grid.steps values.
  const std::vector<double>& reference() const { return reference_; }
  double initial_input() const;
  ControllerConfig controller_config(const ControllerSpec& spec) const;

 private:
  ScenarioConfig config_;
  DepthField field_;
  std::vector<Island> islands_;
  TimeGrid grid_;
  std::size_t steps_ = 0;
  std::vector<double> reference_;
  std::vector<ObservationPool> pools_;
};

/// Reference samples tau(k * step) for k = 0..count-1, linear between waypoints. Past the
/// last waypoint the final segment is extended, so the prediction window near the end of a
/// run still sees the reference speed.
std::vector<double> sample_reference(const std::vector<Waypoint>& waypoints, double step_h,
                                     std::size_t count);

struct RealizedSeries {
  std::vector<double> radius;       // per step
  std::vector<std::size_t> index;   // pool index drawn at each step
};

/// Draws the ground-truth radius at each step from the pool, deterministically from seed.
RealizedSeries realize_uncertainty(const ObservationPool& pool, std::uint64_t seed);

/// N training observations per step drawn without replacement from the pool, never
/// reusing the realized index. Prefixes are nested: the first n draws do not depend on n.
std::vector<std::vector<double>> draw_training(const ObservationPool& pool,
                                               const RealizedSeries& realized, std::size_t n,
                                               std::uint64_t seed);

/// Timelines for one repetition: training sets as observations, realized radii as truth.
std::vector<ObstacleTimeline> sample_timelines(const Scenario& scenario, std::size_t n,
                                               std::uint64_t seed);

struct RunMetrics {
  double total_cost = 0.0;
  double safety_margin = 0.0;  // km; negative means penetration
  bool collision = false;
  bool valid = true;
};

struct RunResult {
  RunMetrics metrics;
  ClosedLoopTrace trace;
  std::vector<double> clearance;  // nearest-obstacle clearance per step (steps + 1)
  std::vector<ObstacleTimeline> timelines;
  std::string error;
};

/// Closed-loop stage costs: sum Q (y - tau)^2 + R (Delta u)^2 over applied steps plus the
/// terminal P term on the final position.
double closed_loop_cost(const ClosedLoopTrace& trace, const CostWeights& w, double initial_input);

/// Minimum over steps and obstacles of |y - center| - realized radius. Without obstacles the
/// half-extent is returned.
double safety_margin(const ClosedLoopTrace& trace, std::span<const ObstacleTimeline> obstacles,
                     const Extent& extent, std::vector<double>* clearance = nullptr);

/// One closed-loop run of `spec` with N training samples on repetition seed `seed`.
RunResult simulate(const Scenario& scenario, const ControllerSpec& spec, std::size_t n,
                   std::uint64_t seed);

struct BatchResult {
  Method method = Method::DR;
  double theta = 0.0;
  std::size_t n = 0;
  double cost_mean = 0.0, cost_std = 0.0;
  double margin_mean = 0.0, margin_std = 0.0;
  double collision_rate = 0.0;  // percent of valid runs
  std::size_t repetitions = 0;
  std::size_t invalid = 0;
  bool failed = false;  // more than 10% of runs invalid
  std::vector<RunResult> runs;
};

/// Seed of repetition `rep`; shared across controllers so batches are paired.
std::uint64_t repetition_seed(std::uint64_t base_seed, std::size_t rep);

/// `repetitions` independent runs (threads = 0: hardware concurrency).
BatchResult monte_carlo(const Scenario& scenario, const ControllerSpec& spec, std::size_t n,
                        std::size_t repetitions, std::uint64_t base_seed, unsigned threads = 0);

/// Convenience form using the scenario config's controller, N, repetitions and seed.
BatchResult monte_carlo(const Scenario& scenario, unsigned threads = 0);

}  // namespace tidenav
