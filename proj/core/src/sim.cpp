#include "tidenav/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "tidenav/error.hpp"

namespace tidenav {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return mix(a ^ mix(b)); }

// Small portable generator so draws do not depend on the standard library's distributions.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on 0 .. n-1 by rejection.
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return static_cast<std::size_t>(v % bound);
  }

 private:
  std::uint64_t state_;
};

constexpr std::uint64_t kRealizeTag = 0x7265616c;
constexpr std::uint64_t kTrainTag = 0x74726169;

std::uint64_t pool_seed(std::uint64_t seed, std::uint64_t tag, const ObservationPool& pool) {
  return mix(mix(seed, tag), static_cast<std::uint64_t>(pool.island_id));
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// ScenarioConfig

void ScenarioConfig::validate() const {
  field.validate();
  if (!(draft_m > 0.0)) throw DomainError("draft must be positive");
  if (!(start_h >= 0.0)) throw DomainError("start_h must be non-negative");
  if (reference.empty()) throw DomainError("reference needs at least one waypoint");
  if (reference.front().t_h != 0.0) throw DomainError("the first reference waypoint must be at t = 0");
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (!field.extent.contains(reference[i].p_km)) {
      throw DomainError("reference waypoint outside the waterway extent");
    }
    if (i > 0 && !(reference[i].t_h > reference[i - 1].t_h)) {
      throw DomainError("reference waypoint times must be strictly increasing");
    }
  }
  vessel().validate();
  if (horizon < 1) throw DomainError("horizon must be at least 1");
  if (!(weights.q >= 0.0 && weights.p >= 0.0)) throw DomainError("q and p must be non-negative");
  if (!(weights.r > 0.0)) throw DomainError("r must be positive");
  if (!(slack_penalty > 0.0)) throw DomainError("slack_penalty must be positive");
  controller.risk.validate();
  if (n_samples < 1) throw DomainError("n_samples must be at least 1");
  if (repetitions < 1) throw DomainError("repetitions must be at least 1");
  if (theta_grid.empty()) throw DomainError("theta_grid must be nonempty");
  for (double th : theta_grid) {
    if (!(th >= 0.0)) throw DomainError("theta_grid values must be non-negative");
  }
  if (n_grid.empty()) throw DomainError("n_grid must be nonempty");
  std::size_t n_max = n_samples;
  for (auto n : n_grid) {
    if (n < 1) throw DomainError("n_grid values must be at least 1");
    n_max = std::max(n_max, n);
  }
  if (pool_size <= n_max) {
    throw DomainError("pool_size must exceed the largest sample count (one value per step is "
                      "held out as the realization)");
  }
  const double steps = duration_h() / sample_time_h;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    throw DomainError("reference duration must be a multiple of the sampling time");
  }
}

VesselModel ScenarioConfig::vessel() const {
  VesselModel v;
  v.sample_time_h = sample_time_h;
  v.u_min = u_min;
  v.u_max = u_max;
  v.x_min = field.extent.lo_km;
  v.x_max = field.extent.hi_km;
  return v;
}

ScenarioConfig default_scenario() {
  ScenarioConfig c;
  c.field.extent = {0.0, 72.0};
  c.field.grid_km = 0.05;
  c.field.period_h = 12.42;
  c.field.noise_sd_m = 0.15;
  c.field.seed = 7;
  c.field.bathymetry = PiecewiseLinear(9.0);
  c.field.amplitude = PiecewiseLinear(1.0);
  c.field.phase = PiecewiseLinear(0.0);
  // Flat-topped bars that barely break the draft around low water.
  c.field.shoals = {
      {20.0, 1.22, 0.6, 200.0},
      {30.0, 1.02, 0.6, 200.0},
      {40.0, 1.08, 0.6, 200.0},
  };
  c.start_h = 6.0;
  c.reference = {{0.0, 0.0}, {6.0, 60.0}};
  c.controller.risk.theta = 0.001;
  c.theta_grid = {0.0, 0.00025, 0.0005, 0.00075, 0.001};
  return c;
}

// ---------------------------------------------------------------------------
// Scenario

Scenario::Scenario(ScenarioConfig config)
    : config_(std::move(config)), field_((config_.validate(), config_.field)) {
  islands_ = find_islands(field_, config_.draft_m);
  steps_ = static_cast<std::size_t>(std::llround(config_.duration_h() / config_.sample_time_h));
  grid_.origin_h = static_cast<double>(config_.pool_size) * field_.period() + config_.start_h;
  grid_.step_h = config_.sample_time_h;
  grid_.steps = steps_ + static_cast<std::size_t>(config_.horizon) + 1;
  reference_ = sample_reference(config_.reference, config_.sample_time_h, grid_.steps);
  for (auto& p : reference_) p = std::clamp(p, config_.field.extent.lo_km, config_.field.extent.hi_km);
  pools_.reserve(islands_.size());
  for (const auto& island : islands_) {
    pools_.push_back(
        build_observation_pool(field_, config_.draft_m, island, grid_, 1, config_.pool_size));
  }
}

double Scenario::initial_input() const {
  if (config_.initial_input) return *config_.initial_input;
  if (reference_.size() < 2) return 0.0;
  return (reference_[1] - reference_[0]) / config_.sample_time_h;
}

ControllerConfig Scenario::controller_config(const ControllerSpec& spec) const {
  ControllerConfig c;
  c.vessel = config_.vessel();
  c.horizon = config_.horizon;
  c.weights = config_.weights;
  c.slack_penalty = config_.slack_penalty;
  c.spec = spec;
  return c;
}

std::vector<double> sample_reference(const std::vector<Waypoint>& waypoints, double step_h,
                                     std::size_t count) {
  if (waypoints.empty()) throw DomainError("reference needs at least one waypoint");
  std::vector<double> out(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) * step_h;
    if (waypoints.size() == 1) {
      out[k] = waypoints.front().p_km;
      continue;
    }
    while (seg + 2 < waypoints.size() && waypoints[seg + 1].t_h <= t) ++seg;
    const auto& a = waypoints[seg];
    const auto& b = waypoints[seg + 1];
    out[k] = a.p_km + (t - a.t_h) / (b.t_h - a.t_h) * (b.p_km - a.p_km);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Uncertainty

RealizedSeries realize_uncertainty(const ObservationPool& pool, std::uint64_t seed) {
  if (pool.size() == 0) throw DomainError("validation pool is empty");
  Stream rng(pool_seed(seed, kRealizeTag, pool));
  RealizedSeries out;
  out.radius.reserve(pool.steps());
  out.index.reserve(pool.steps());
  for (const auto& values : pool.values) {
    const std::size_t i = rng.below(values.size());
    out.index.push_back(i);
    out.radius.push_back(values[i]);
  }
  return out;
}

std::vector<std::vector<double>> draw_training(const ObservationPool& pool,
                                               const RealizedSeries& realized, std::size_t n,
                                               std::uint64_t seed) {
  if (n < 1) throw DomainError("at least one training sample is required");
  if (realized.index.size() != pool.steps()) {
    throw DomainError("realized series does not match the pool");
  }
  const std::size_t p = pool.size();
  if (p < n + 1) {
    throw DomainError("validation pool exhausted: " + std::to_string(p) + " values cannot supply " +
                      std::to_string(n) + " training samples plus a held-out realization");
  }
  const std::uint64_t base = pool_seed(seed, kTrainTag, pool);
  std::vector<std::vector<double>> out(pool.steps());
  std::vector<std::size_t> idx(p);
  for (std::size_t step = 0; step < pool.steps(); ++step) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::swap(idx[realized.index[step]], idx[p - 1]);
    Stream rng(mix(base, step));
    auto& set = out[step];
    set.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + rng.below(p - 1 - i);
      std::swap(idx[i], idx[j]);
      set.push_back(pool.values[step][idx[i]]);
    }
  }
  return out;
}

std::vector<ObstacleTimeline> sample_timelines(const Scenario& scenario, std::size_t n,
                                               std::uint64_t seed) {
  std::vector<ObstacleTimeline> out;
  out.reserve(scenario.pools().size());
  for (const auto& pool : scenario.pools()) {
    const auto realized = realize_uncertainty(pool, seed);
    ObstacleTimeline tl;
    tl.id = pool.island_id;
    tl.center_km = pool.center_km;
    tl.grid = pool.grid;
    tl.observation_sets = draw_training(pool, realized, n, seed);
    tl.realized_radius = realized.radius;
    out.push_back(std::move(tl));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

double closed_loop_cost(const ClosedLoopTrace& trace, const CostWeights& w, double initial_input) {
  double cost = 0.0;
  double prev = initial_input;
  for (std::size_t t = 0; t < trace.u.size(); ++t) {
    const double e = trace.y[t] - trace.reference[t];
    const double du = trace.u[t] - prev;
    cost += w.q * e * e + w.r * du * du;
    prev = trace.u[t];
  }
  if (!trace.y.empty()) {
    const double e = trace.y.back() - trace.reference[trace.y.size() - 1];
    cost += w.p * e * e;
  }
  return cost;
}

double safety_margin(const ClosedLoopTrace& trace, std::span<const ObstacleTimeline> obstacles,
                     const Extent& extent, std::vector<double>* clearance) {
  const double none = 0.5 * extent.length();
  double margin = none;
  if (clearance) clearance->assign(trace.y.size(), none);
  bool any = false;
  for (std::size_t t = 0; t < trace.y.size(); ++t) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& ob : obstacles) {
      if (t >= ob.realized_radius.size()) throw DomainError("obstacle timeline shorter than run");
      nearest = std::min(nearest, std::abs(trace.y[t] - ob.center_km) - ob.realized_radius[t]);
    }
    if (obstacles.empty()) continue;
    if (clearance) (*clearance)[t] = nearest;
    margin = any ? std::min(margin, nearest) : nearest;
    any = true;
  }
  return margin;
}

RunResult simulate(const Scenario& scenario, const ControllerSpec& spec, std::size_t n,
                   std::uint64_t seed) {
  RunResult out;
  out.timelines = sample_timelines(scenario, n, seed);
  const auto& ref = scenario.reference();
  out.trace = receding_horizon_run(scenario.controller_config(spec), out.timelines, ref,
                                   scenario.steps(), ref.front(), scenario.initial_input());
  out.metrics.total_cost =
      closed_loop_cost(out.trace, scenario.config().weights, scenario.initial_input());
  out.metrics.safety_margin = safety_margin(out.trace, out.timelines,
                                            scenario.field().extent(), &out.clearance);
  out.metrics.collision = out.metrics.safety_margin < 0.0;
  if (out.trace.aborted) {
    out.metrics.valid = false;
    out.error = out.trace.error;
  }
  return out;
}

std::uint64_t repetition_seed(std::uint64_t base_seed, std::size_t rep) {
  return mix(base_seed, 0x5eed0000ULL + static_cast<std::uint64_t>(rep));
}

BatchResult monte_carlo(const Scenario& scenario, const ControllerSpec& spec, std::size_t n,
                        std::size_t repetitions, std::uint64_t base_seed, unsigned threads) {
  if (repetitions < 1) throw DomainError("repetitions must be at least 1");
  BatchResult out;
  out.method = spec.method;
  out.theta = spec.method == Method::DR ? spec.risk.theta : 0.0;
  out.n = n;
  out.repetitions = repetitions;
  out.runs.resize(repetitions);

  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, repetitions));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < repetitions; r = next++) {
      out.runs[r] = simulate(scenario, spec, n, repetition_seed(base_seed, r));
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<double> cost, margin;
  std::size_t collisions = 0;
  for (const auto& run : out.runs) {
    if (!run.metrics.valid) {
      ++out.invalid;
      continue;
    }
    cost.push_back(run.metrics.total_cost);
    margin.push_back(run.metrics.safety_margin);
    if (run.metrics.collision) ++collisions;
  }
  const auto c = moments(cost);
  const auto m = moments(margin);
  out.cost_mean = c.mean;
  out.cost_std = c.sd;
  out.margin_mean = m.mean;
  out.margin_std = m.sd;
  out.collision_rate =
      cost.empty() ? 0.0 : 100.0 * static_cast<double>(collisions) / static_cast<double>(cost.size());
  out.failed = 10 * out.invalid > repetitions;
  return out;
}

BatchResult monte_carlo(const Scenario& scenario, unsigned threads) {
  const auto& c = scenario.config();
  return monte_carlo(scenario, c.controller, c.n_samples, c.repetitions, c.seed, threads);
}

}  // namespace tidenav
