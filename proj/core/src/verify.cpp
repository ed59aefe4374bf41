#include "tidenav/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "tidenav/config.hpp"
#include "tidenav/mpc.hpp"
#include "tidenav/risk.hpp"
#include "tidenav/sim.hpp"

namespace tidenav {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

EmpiricalDistribution random_distribution(Rng& rng, std::size_t n, double hi = 3.0) {
  std::vector<double> s(n);
  for (auto& v : s) v = uniform(rng, 0.0, hi);
  return EmpiricalDistribution(std::move(s));
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(3);
  o << v;
  return o.str();
}

CheckResult projection_check(Rng& rng) {
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const HalfspaceObstacle ob{uniform(rng, -50, 50)};
    const double y = uniform(rng, -60, 60);
    const double w = uniform(rng, 0, 20);
    worst = std::max(worst, std::abs(safety_loss(y, ob, w) - safety_loss_oracle(y, ob, w)));
  }
  return {"safety loss matches projection", worst <= 1e-12, "max deviation " + fmt(worst)};
}

CheckResult duality(Rng& rng) {
  double worst = 0.0;
  bool certificates = true;
  for (int i = 0; i < 100; ++i) {
    const auto dist = random_distribution(rng, 1 + rng() % 12);
    const HalfspaceObstacle ob{uniform(rng, 0, 10)};
    const double y = uniform(rng, -2, 12);
    const double z = uniform(rng, -1, 3);
    const double theta = uniform(rng, 0, 0.5);
    const auto vertex = inner_sup_lp(dist, y, ob, z, theta);
    const auto full = inner_sup_full_lp(dist, y, ob, z, theta);
    const double closed = inner_sup_closed(dist, y, ob, z, theta);
    worst = std::max({worst, std::abs(vertex.value - closed), std::abs(full.value - closed)});
    const auto& rho = vertex.certificate.rho;
    if (vertex.certificate.lambda != 1.0) certificates = false;
    if (y != ob.center_km && !((rho[0] == 1.0 && rho[1] == 0.0) || (rho[0] == 0.0 && rho[1] == 1.0))) {
      certificates = false;
    }
  }
  return {"dual program equals closed form", worst <= 1e-6 && certificates,
          "max deviation " + fmt(worst) + (certificates ? "" : ", bad certificate")};
}

CheckResult value_floor(Rng& rng) {
  double worst_gap = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto dist = random_distribution(rng, 1 + rng() % 15);
    const double alpha = uniform(rng, 0.5, 0.99);
    const double theta = uniform(rng, 0, 0.01);
    const double v = dr_cvar_at_distance(dist, uniform(rng, 0, 5), alpha, theta);
    worst_gap = std::min(worst_gap, v - theta / (1.0 - alpha));
  }
  return {"worst-case CVaR never below theta/(1-alpha)", worst_gap >= -1e-9,
          "worst gap " + fmt(worst_gap)};
}

CheckResult single_atom(Rng& rng) {
  bool ok = true;
  for (int i = 0; i < 500 && ok; ++i) {
    const double w0 = uniform(rng, 0, 5);
    RiskParams risk{uniform(rng, 0.5, 0.99), uniform(rng, 0, 0.1), uniform(rng, 0, 0.004)};
    const auto sr = safe_radius(EmpiricalDistribution({w0}), risk);
    const double slack = risk.delta - risk.value_floor();
    if (slack < 0) {
      ok = !sr.feasible;
    } else {
      ok = sr.feasible && std::abs(sr.radius - std::max(0.0, w0 - slack)) <= 1e-9;
    }
  }
  return {"single-atom safe radius closed form", ok, ""};
}

CheckResult radius_agreement(Rng& rng) {
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const auto dist = random_distribution(rng, 1 + rng() % 12);
    RiskParams risk{uniform(rng, 0.5, 0.99), uniform(rng, 0, 1.0), uniform(rng, 0, 0.002)};
    const auto a = safe_radius(dist, risk);
    const auto b = safe_radius_bisection(dist, risk);
    if (a.feasible != b.feasible) return {"breakpoint and bisection radii agree", false, "feasibility"};
    if (a.feasible) worst = std::max(worst, std::abs(a.radius - b.radius));
  }
  return {"breakpoint and bisection radii agree", worst <= 1e-8, "max deviation " + fmt(worst)};
}

CheckResult theta_zero(Rng& rng) {
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const auto dist = random_distribution(rng, 1 + rng() % 12);
    const double d = uniform(rng, 0, 3);
    const double alpha = uniform(rng, 0.5, 0.99);
    std::vector<double> losses;
    for (double w : dist.samples()) losses.push_back(std::max(0.0, w - d));
    worst = std::max(worst, std::abs(dr_cvar_at_distance(dist, d, alpha, 0.0) - cvar(losses, alpha)));
  }
  return {"theta = 0 reduces to empirical CVaR", worst <= 1e-12, "max deviation " + fmt(worst)};
}

CheckResult wasserstein(Rng& rng) {
  double worst = 0.0;
  bool axioms = true;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng() % 8;
    const auto a = random_distribution(rng, n), b = random_distribution(rng, n),
               c = random_distribution(rng, n);
    worst = std::max(worst, std::abs(w1_distance(a, b) - w1_distance_lp(a, b)));
    const double ab = w1_distance(a, b), ba = w1_distance(b, a);
    if (std::abs(ab - ba) > 1e-12 || w1_distance(a, a) != 0.0 ||
        ab > w1_distance(a, c) + w1_distance(c, b) + 1e-12) {
      axioms = false;
    }
  }
  return {"sorted W1 equals transport LP, metric axioms", worst <= 1e-9 && axioms,
          "max deviation " + fmt(worst)};
}

ObstacleTimeline random_timeline(Rng& rng, int id, double center, std::size_t steps, std::size_t n) {
  ObstacleTimeline tl;
  tl.id = id;
  tl.center_km = center;
  tl.grid = {0.0, 0.1, steps};
  tl.realized_radius.assign(steps, 0.0);
  tl.observation_sets.assign(steps, std::vector<double>(n));
  const double base = uniform(rng, 0.2, 1.2);
  for (auto& set : tl.observation_sets) {
    for (auto& v : set) v = std::max(0.0, base + uniform(rng, -0.2, 0.2));
  }
  return tl;
}

CheckResult branch_and_bound_exact(Rng& rng) {
  double worst = 0.0;
  for (int i = 0; i < 30; ++i) {
    const int K = 2 + static_cast<int>(rng() % 5);
    const double v = uniform(rng, 5, 15);
    MpcSetup setup;
    setup.horizon = K;
    setup.initial_state = uniform(rng, 5, 10);
    setup.previous_input = v;
    for (int k = 0; k <= K; ++k) setup.reference.push_back(setup.initial_state + 0.1 * v * k);
    std::vector<ObstacleTimeline> obs;
    const int L = 1 + static_cast<int>(rng() % 2);
    for (int l = 0; l < L; ++l) {
      obs.push_back(random_timeline(rng, l + 1, setup.initial_state + uniform(rng, 0.2, 0.1 * v * K),
                                    static_cast<std::size_t>(K) + 1, 5));
    }
    const RiskParams risk{0.95, 0.02, 0.0005};
    const auto radii = compile_risk_constraints(obs, 0, K, risk);
    const auto pairs = active_pairs(setup, radii);
    if (pairs.size() > 12) continue;
    const auto bb = branch_and_bound(setup, pairs, false);
    const auto ex = enumerate_sides(setup, pairs, false);
    if (bb.found != ex.found) {
      return {"branch and bound matches enumeration", false,
              std::string("feasibility: search ") + (bb.found ? "found" : "none") + ", enumeration " +
                  (ex.found ? "found" : "none") + ", pairs " + std::to_string(pairs.size())};
    }
    if (bb.found) worst = std::max(worst, std::abs(bb.solution.objective - ex.solution.objective));
  }
  return {"branch and bound matches enumeration", worst <= 1e-6, "max deviation " + fmt(worst)};
}

CheckResult zero_cost() {
  ScenarioConfig c = default_scenario();
  c.field.shoals.clear();
  c.reference = {{0.0, 5.0}, {2.0, 25.0}};
  c.repetitions = 1;
  const Scenario s(c);
  const auto run = simulate(s, c.controller, c.n_samples, 1);
  return {"obstacle-free tracking has zero cost", run.metrics.total_cost <= 1e-9,
          "cost " + fmt(run.metrics.total_cost)};
}

CheckResult saa_collapse() {
  ScenarioConfig c = default_scenario();
  c.pool_size = 40;
  const Scenario s(c);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    ControllerSpec dr{Method::DR, {0.95, 0.02, 0.0}};
    ControllerSpec saa{Method::SAA, {0.95, 0.02, 0.0007}};
    const auto a = simulate(s, dr, 6, seed);
    const auto b = simulate(s, saa, 6, seed);
    if (a.trace.u.size() != b.trace.u.size()) return {"DR with theta = 0 equals SAA", false, "length"};
    for (std::size_t i = 0; i < a.trace.u.size(); ++i) {
      worst = std::max(worst, std::abs(a.trace.u[i] - b.trace.u[i]));
    }
  }
  return {"DR with theta = 0 equals SAA", worst <= 1e-8, "max input deviation " + fmt(worst)};
}

CheckResult field_invariants() {
  auto c = default_scenario();
  c.field.noise_sd_m = 0.0;
  const DepthField field(c.field);
  const auto islands = find_islands(field, c.draft_m);
  if (islands.empty()) return {"timeline periodicity and enclosure", false, "no islands"};
  const double T = field.period();
  const TimeGrid grid{4 * T, 0.25, 60};
  bool ok = true;
  for (const auto& is : islands) {
    const auto tl = build_obstacle_timeline(field, c.draft_m, is.id, grid, 3);
    const TimeGrid later{5 * T, 0.25, 60};
    const auto tl2 = build_obstacle_timeline(field, c.draft_m, is.id, later, 3);
    for (std::size_t k = 0; k < tl.steps(); ++k) {
      if (std::abs(tl.realized_radius[k] - tl2.realized_radius[k]) > 1e-12) ok = false;
      for (double o : tl.observation_sets[k]) {
        if (std::abs(o - tl.realized_radius[k]) > 1e-12) ok = false;
      }
      for (const auto& part : extract_island_region(field, c.draft_m, grid.at(k))) {
        for (double p : {part.lo, part.hi}) {
          if (is.catchment.contains(p) && std::abs(p - is.center_km) > tl.realized_radius[k] + 1e-12) {
            ok = false;
          }
        }
      }
    }
  }
  return {"timeline periodicity and enclosure", ok, ""};
}

CheckResult config_round_trip() {
  const auto a = parse_config_text("");
  const auto b = parse_config_text(serialize_config(a));
  return {"config serialization round-trips", a == b, ""};
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed, std::ostream* progress) {
  Rng rng(seed);
  std::vector<std::function<CheckResult()>> checks = {
      [&] { return projection_check(rng); },
      [&] { return duality(rng); },
      [&] { return value_floor(rng); },
      [&] { return single_atom(rng); },
      [&] { return radius_agreement(rng); },
      [&] { return theta_zero(rng); },
      [&] { return wasserstein(rng); },
      [&] { return branch_and_bound_exact(rng); },
      [] { return field_invariants(); },
      [] { return zero_cost(); },
      [] { return saa_collapse(); },
      [] { return config_round_trip(); },
  };
  std::vector<CheckResult> out;
  for (auto& check : checks) {
    CheckResult r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r.name = "check " + std::to_string(out.size() + 1);
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    if (progress) {
      *progress << (r.passed ? "PASS " : "FAIL ") << r.name;
      if (!r.detail.empty()) *progress << " (" << r.detail << ")";
      *progress << "\n";
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tidenav
