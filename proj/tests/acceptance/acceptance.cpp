// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tidenav/experiment.hpp"
#include "tidenav/mpc.hpp"
#include "tidenav/risk.hpp"
#include "tidenav/sim.hpp"

using namespace tidenav;
using oracle::Rng;
using oracle::uniform;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome safety_loss_projection() {
  Rng rng(101);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double c = uniform(rng, -50, 50), y = uniform(rng, -60, 60), w = uniform(rng, 0, 20);
    worst = std::max(worst, std::abs(safety_loss(y, HalfspaceObstacle{c}, w) -
                                     oracle::projection_loss(y, c, w)));
  }
  const double s = seconds_since(t0);
  return {worst <= 1e-12 && s < 1.0, fmt("max deviation %.3g", worst) + fmt(", %.3f s", s)};
}

Outcome dual_closed_form() {
  Rng rng(202);
  const auto t0 = Clock::now();
  double worst = 0.0;
  int bad_lambda = 0, bad_rho = 0;
  for (int i = 0; i < 100; ++i) {
    const auto samples = oracle::uniform_samples(rng, 1 + rng() % 15, 0.0, 3.0);
    const EmpiricalDistribution dist(samples);
    const HalfspaceObstacle ob{uniform(rng, 0, 10)};
    const double y = uniform(rng, -2, 12), z = uniform(rng, -1, 3), theta = uniform(rng, 0, 0.5);
    const auto lp = inner_sup_lp(dist, y, ob, z, theta);
    worst = std::max(worst, std::abs(lp.value - inner_sup_closed(dist, y, ob, z, theta)));
    if (lp.certificate.lambda != 1.0) ++bad_lambda;
    const auto& rho = lp.certificate.rho;
    const bool vertex = (rho[0] == 1.0 && rho[1] == 0.0) || (rho[0] == 0.0 && rho[1] == 1.0);
    if (y != ob.center_km && !vertex) ++bad_rho;
  }
  const double s = seconds_since(t0);
  return {worst <= 1e-6 && bad_lambda == 0 && bad_rho == 0 && s < 10.0,
          fmt("max deviation %.3g", worst) + fmt(", lambda != 1: %.0f", bad_lambda) +
              fmt(", non-vertex rho: %.0f", bad_rho) + fmt(", %.3f s", s)};
}

Outcome value_floor() {
  Rng rng(303);
  double worst_gap = INFINITY, worst_eq = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto samples = oracle::uniform_samples(rng, 1 + rng() % 15, 0.0, 3.0);
    const EmpiricalDistribution dist(samples);
    const double alpha = uniform(rng, 0.5, 0.99), theta = uniform(rng, 0, 0.01);
    const double floor = theta / (1.0 - alpha);
    const double c = uniform(rng, -5, 5), y = uniform(rng, -8, 8);
    worst_gap = std::min(worst_gap, dr_cvar(dist, y, HalfspaceObstacle{c}, alpha, theta) - floor);
    // Beyond the largest radius every loss is zero and the floor is attained.
    const double far = dist.max() + uniform(rng, 0, 2);
    worst_eq = std::max(worst_eq, std::abs(dr_cvar_at_distance(dist, far, alpha, theta) - floor));
  }
  return {worst_gap >= -1e-9 && worst_eq <= 1e-9,
          fmt("min gap %.3g", worst_gap) + fmt(", equality deviation %.3g", worst_eq)};
}

Outcome single_atom_radius() {
  double worst = 0.0;
  int cases = 0, feasibility_errors = 0;
  for (double w0 : {0.25, 0.5, 1.0, 2.0, 5.0}) {
    for (double delta : {0.0, 0.005, 0.01, 0.02, 0.05, 0.1}) {
      for (double theta : {0.0, 0.00025, 0.0005, 0.001, 0.002, 0.004}) {
        for (double alpha : {0.8, 0.9, 0.95, 0.99}) {
          ++cases;
          const RiskParams risk{alpha, delta, theta};
          const auto r = safe_radius(EmpiricalDistribution({w0}), risk);
          const double floor = theta / (1.0 - alpha);
          if (delta < floor) {
            if (r.feasible) ++feasibility_errors;
            continue;
          }
          if (!r.feasible) {
            ++feasibility_errors;
            continue;
          }
          worst = std::max(worst, std::abs(r.radius - (w0 - (delta - floor))));
        }
      }
    }
  }
  return {worst <= 1e-6 && feasibility_errors == 0,
          fmt("%.0f cases", cases) + fmt(", max deviation %.3g", worst) +
              fmt(", feasibility errors %.0f", feasibility_errors)};
}

Outcome saa_collapse() {
  const Scenario scenario(default_scenario());
  const ControllerSpec dr{Method::DR, {0.95, 0.02, 0.0}};
  const ControllerSpec saa{Method::SAA, {0.95, 0.02, 0.0}};
  double worst = 0.0;
  int mismatched = 0;
  for (std::size_t rep = 0; rep < 20; ++rep) {
    const auto seed = repetition_seed(2024, rep);
    const auto a = simulate(scenario, dr, 11, seed);
    const auto b = simulate(scenario, saa, 11, seed);
    if (a.trace.u.size() != b.trace.u.size() || a.trace.u.empty()) {
      ++mismatched;
      continue;
    }
    for (std::size_t i = 0; i < a.trace.u.size(); ++i) {
      worst = std::max(worst, std::abs(a.trace.u[i] - b.trace.u[i]));
    }
  }
  return {worst <= 1e-8 && mismatched == 0,
          fmt("20 runs, max input deviation %.3g", worst) +
              (mismatched ? fmt(", %.0f length mismatches", mismatched) : "")};
}

ObstacleTimeline random_obstacle(Rng& rng, int id, double center, std::size_t steps) {
  ObstacleTimeline tl;
  tl.id = id;
  tl.center_km = center;
  tl.grid = {0.0, 0.1, steps};
  tl.realized_radius.assign(steps, 0.0);
  const double base = uniform(rng, 0.1, 1.5);
  const std::size_t n = 1 + rng() % 8;
  for (std::size_t k = 0; k < steps; ++k) {
    std::vector<double> set(n);
    for (auto& v : set) v = std::max(0.0, base + uniform(rng, -0.3, 0.3));
    tl.observation_sets.push_back(std::move(set));
  }
  return tl;
}

Outcome branch_and_bound_exact() {
  Rng rng(606);
  double worst = 0.0;
  int instances = 0, constrained = 0, disagreements = 0;
  while (instances < 50) {
    const int K = 1 + static_cast<int>(rng() % 6);
    const double v = uniform(rng, 4, 20);
    MpcSetup setup;
    setup.horizon = K;
    setup.vessel.x_min = 0.0;
    setup.vessel.x_max = 100.0;
    setup.initial_state = uniform(rng, 10, 20);
    setup.previous_input = uniform(rng, 0, 25);
    for (int k = 0; k <= K; ++k) setup.reference.push_back(setup.initial_state + 0.1 * v * k);
    std::vector<ObstacleTimeline> obstacles;
    const int L = 1 + static_cast<int>(rng() % 2);
    for (int l = 0; l < L; ++l) {
      const double c = setup.initial_state + uniform(rng, -0.5, 0.1 * v * K + 0.5);
      obstacles.push_back(random_obstacle(rng, l + 1, c, static_cast<std::size_t>(K) + 1));
    }
    const RiskParams risk{0.95, uniform(rng, 0.0, 0.1), uniform(rng, 0.0, 0.0015)};
    const auto step = dr_mpc_step(setup, obstacles, 0, risk);
    ++instances;
    if (!step.pairs.empty()) ++constrained;
    auto oracle = enumerate_sides(setup, step.pairs, false);
    if (!oracle.found) oracle = enumerate_sides(setup, step.pairs, true);
    if (!oracle.found) {
      ++disagreements;
      continue;
    }
    worst = std::max(worst, std::abs(step.solution.objective - oracle.solution.objective));
  }
  return {worst <= 1e-6 && disagreements == 0,
          fmt("%.0f instances", instances) + fmt(" (%.0f with active pairs)", constrained) +
              fmt(", max objective deviation %.3g", worst)};
}

Outcome zero_cost_tracking() {
  ScenarioConfig c = default_scenario();
  c.field.shoals.clear();
  c.reference = {{0.0, 4.0}, {4.0, 52.0}};
  const Scenario scenario(c);
  double worst = 0.0;
  for (Method m : {Method::DR, Method::SAA, Method::CC}) {
    const auto run = simulate(scenario, ControllerSpec{m, {0.95, 0.02, 0.001}}, 11, 7);
    worst = std::max(worst, run.metrics.valid ? run.metrics.total_cost : INFINITY);
  }
  return {worst <= 1e-9, fmt("max cost %.3g", worst)};
}

std::string rates(const std::vector<BatchResult>& rows) {
  std::string s;
  for (const auto& b : rows) {
    if (!s.empty()) s += " ";
    s += fmt("%.0f%%", b.collision_rate);
  }
  return s;
}

bool nonincreasing(const std::vector<BatchResult>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].collision_rate > rows[i - 1].collision_rate) return false;
  }
  return true;
}

Outcome theta_trend() {
  const auto c = default_scenario();
  const Scenario scenario(c);
  const auto t0 = Clock::now();
  std::vector<BatchResult> dr;
  bool feasible = true;
  for (double theta : c.theta_grid) {
    const RiskParams risk{0.95, 0.02, theta};
    feasible = feasible && risk.delta >= risk.value_floor();
    dr.push_back(monte_carlo(scenario, {Method::DR, risk}, 11, 100, c.seed));
  }
  const auto saa = monte_carlo(scenario, {Method::SAA, {0.95, 0.02, 0.0}}, 11, 100, c.seed);
  const auto cc = monte_carlo(scenario, {Method::CC, {0.95, 0.02, 0.0}}, 11, 100, c.seed);
  double best = INFINITY;
  bool cost_ok = true, any_failed = saa.failed || cc.failed;
  for (std::size_t i = 0; i < dr.size(); ++i) {
    best = std::min(best, dr[i].collision_rate);
    any_failed = any_failed || dr[i].failed;
    if (i > 0 && dr[i].cost_mean < dr[i - 1].cost_mean) cost_ok = false;
  }
  const bool a = feasible && nonincreasing(dr) && dr.back().collision_rate == 0.0;
  const bool b = saa.collision_rate > best && cc.collision_rate > best;
  const double s = seconds_since(t0);
  std::string costs;
  for (const auto& r : dr) costs += fmt(" %.4g", r.cost_mean);
  return {a && b && cost_ok && !any_failed && s < 600.0,
          "DR " + rates(dr) + fmt(", SAA %.0f%%", saa.collision_rate) +
              fmt(", CC %.0f%%", cc.collision_rate) + ", DR cost" + costs +
              fmt(", %.1f s", s)};
}

Outcome sample_size_trend() {
  const auto c = default_scenario();
  const Scenario scenario(c);
  const auto t0 = Clock::now();
  const RiskParams risk = c.controller.risk;
  const bool feasible = risk.delta >= risk.value_floor();
  bool monotone = true, at_six = true, any_failed = false;
  std::string detail;
  for (Method m : {Method::DR, Method::SAA, Method::CC}) {
    std::vector<BatchResult> rows;
    for (std::size_t n : c.n_grid) {
      const ControllerSpec spec{m, m == Method::DR ? risk : RiskParams{0.95, 0.02, 0.0}};
      rows.push_back(monte_carlo(scenario, spec, n, 100, c.seed));
      any_failed = any_failed || rows.back().failed;
    }
    monotone = monotone && nonincreasing(rows);
    for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
      if (c.n_grid[i] != 6) continue;
      const bool zero = rows[i].collision_rate == 0.0;
      at_six = at_six && (m == Method::DR ? zero : !zero);
    }
    detail += (detail.empty() ? "" : ", ") + to_string(m) + " " + rates(rows);
  }
  const double s = seconds_since(t0);
  detail += std::string(monotone ? "" : "; not monotone in N") +
            (at_six ? "" : "; N=6 separation not met") + fmt(", %.1f s", s);
  return {feasible && monotone && at_six && !any_failed && s < 900.0, detail};
}

Outcome wasserstein_metric() {
  Rng rng(1010);
  double worst_lp = 0.0, worst_match = 0.0;
  int axiom_failures = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + rng() % 7;
    const auto a = oracle::uniform_samples(rng, n, 0.0, 3.0);
    const auto b = oracle::uniform_samples(rng, n, 0.0, 3.0);
    const auto c = oracle::uniform_samples(rng, n, 0.0, 3.0);
    const EmpiricalDistribution A(a), B(b), C(c);
    const double ab = w1_distance(A, B);
    worst_lp = std::max(worst_lp, std::abs(ab - w1_distance_lp(A, B)));
    worst_match = std::max(worst_match, std::abs(ab - oracle::matching_w1(a, b)));
    if (w1_distance(A, A) != 0.0 || ab < 0.0 || std::abs(ab - w1_distance(B, A)) > 1e-12 ||
        ab > w1_distance(A, C) + w1_distance(C, B) + 1e-12) {
      ++axiom_failures;
    }
  }
  return {worst_lp <= 1e-9 && worst_match <= 1e-9 && axiom_failures == 0,
          fmt("max deviation vs transport LP %.3g", worst_lp) +
              fmt(", vs matching %.3g", worst_match) + fmt(", axiom failures %.0f", axiom_failures)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "tidenav_acceptance_determinism";
  fs::remove_all(root);
  std::ostringstream sink;
  std::vector<std::string> differing;
  std::size_t compared = 0;
  for (const std::string sub : {"sweep-theta", "sweep-n"}) {
    std::string first;
    for (unsigned threads : {1u, 4u}) {
      ExperimentSpec spec;
      spec.subcommand = sub;
      spec.output_dir = (root / (sub + "_" + std::to_string(threads))).string();
      spec.seed = 11;
      spec.threads = threads;
      spec.write_runs = false;
      if (run_experiment(spec, sink, sink) != kExitOk) return {false, sub + " exited with an error"};
    }
    for (const std::string file : {"results.csv", "summary.json"}) {
      const auto a = slurp(root / (sub + "_1") / file);
      const auto b = slurp(root / (sub + "_4") / file);
      ++compared;
      if (a.empty() || a != b) differing.push_back(sub + "/" + file);
    }
  }
  fs::remove_all(root);
  std::string detail = fmt("%.0f files compared across repeated runs", compared);
  for (const auto& d : differing) detail += ", differs: " + d;
  return {differing.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"safety loss equals projection distance", safety_loss_projection},
      {"dual worst-case expectation equals closed form", dual_closed_form},
      {"worst-case CVaR value floor", value_floor},
      {"single-atom safe radius", single_atom_radius},
      {"DR at theta = 0 reproduces SAA inputs", saa_collapse},
      {"branch and bound matches side enumeration", branch_and_bound_exact},
      {"obstacle-free tracking has zero cost", zero_cost_tracking},
      {"collision and cost trends over theta", theta_trend},
      {"collision trends over sample size", sample_size_trend},
      {"order-1 Wasserstein distance", wasserstein_metric},
      {"sweep outputs are byte-identical", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failures;
    std::printf("%s %2zu %s (%s)\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
