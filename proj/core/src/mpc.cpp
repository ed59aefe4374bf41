#include "tidenav/mpc.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "tidenav/error.hpp"
#include "tidenav/qp.hpp"

namespace tidenav {

void VesselModel::validate() const {
  if (!(sample_time_h > 0.0)) throw DomainError("sampling time must be positive");
  if (!(u_min <= u_max)) throw DomainError("input bounds are empty");
  if (!(x_min <= x_max)) throw DomainError("state bounds are empty");
}

void MpcSetup::validate() const {
  vessel.validate();
  if (horizon < 1) throw DomainError("horizon must be at least 1");
  if (!(weights.q >= 0.0 && weights.p >= 0.0)) throw DomainError("Q and P must be non-negative");
  if (!(weights.r > 0.0)) throw DomainError("R must be positive");
  if (reference.size() != static_cast<std::size_t>(horizon) + 1) {
    throw DomainError("reference window must hold K + 1 values");
  }
  if (!(slack_penalty > 0.0) || !(slack_curvature > 0.0)) {
    throw DomainError("slack penalty and curvature must be positive");
  }
}

std::string to_string(Method m) {
  switch (m) {
    case Method::DR: return "DR-MPC";
    case Method::SAA: return "SAA-MPC";
    case Method::CC: return "CC-MPC";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  std::string t;
  for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "dr" || t == "dr-mpc") return Method::DR;
  if (t == "saa" || t == "saa-mpc") return Method::SAA;
  if (t == "cc" || t == "cc-mpc") return Method::CC;
  throw DomainError("unknown controller method '" + s + "' (expected dr, saa or cc)");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "OPTIMAL";
    case SolveStatus::Softened: return "SOFTENED";
    case SolveStatus::InfeasibleHard: return "INFEASIBLE_HARD";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Radii

namespace {

const std::vector<double>& observations_at(const ObstacleTimeline& tl, std::size_t idx) {
  if (idx >= tl.observation_sets.size() || tl.observation_sets[idx].empty()) {
    throw DomainError("obstacle " + std::to_string(tl.id) + " has no observation set at step " +
                      std::to_string(idx));
  }
  return tl.observation_sets[idx];
}

template <typename RadiusFn>
std::vector<RiskRadius> compile_with(std::span<const ObstacleTimeline> obstacles, std::size_t t,
                                     int horizon, RadiusFn&& radius_of) {
  std::vector<RiskRadius> out;
  out.reserve(obstacles.size() * static_cast<std::size_t>(horizon));
  for (std::size_t l = 0; l < obstacles.size(); ++l) {
    for (int k = 1; k <= horizon; ++k) {
      const auto& obs = observations_at(obstacles[l], t + static_cast<std::size_t>(k));
      RiskRadius rr = radius_of(obs);
      rr.obstacle = l;
      rr.step = k;
      rr.center_km = obstacles[l].center_km;
      out.push_back(rr);
    }
  }
  return out;
}

}  // namespace

std::vector<RiskRadius> compile_risk_constraints(std::span<const ObstacleTimeline> obstacles,
                                                 std::size_t t, int horizon,
                                                 const RiskParams& risk) {
  risk.validate();
  return compile_with(obstacles, t, horizon, [&](const std::vector<double>& obs) {
    const EmpiricalDistribution dist(obs);
    RiskRadius rr;
    const auto sr = safe_radius(dist, risk);
    if (!sr.feasible) {
      rr.kind = RadiusKind::Infeasible;
      rr.radius_km = soft_radius(dist, risk);
    } else {
      rr.radius_km = sr.radius;
      rr.kind = sr.radius > 0.0 ? RadiusKind::Active : RadiusKind::Free;
    }
    return rr;
  });
}

double cc_radius(std::span<const double> samples, double alpha) {
  if (samples.empty()) throw DomainError("chance constraint needs at least one sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (samples.size() == 1) return samples.front();
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::normal_distribution<double> gauss;
  return mean + boost::math::quantile(gauss, alpha) * sd;
}

std::vector<RiskRadius> compile_cc_constraints(std::span<const ObstacleTimeline> obstacles,
                                               std::size_t t, int horizon, double alpha) {
  return compile_with(obstacles, t, horizon, [&](const std::vector<double>& obs) {
    RiskRadius rr;
    rr.radius_km = cc_radius(obs, alpha);
    rr.kind = rr.radius_km > 0.0 ? RadiusKind::Active : RadiusKind::Free;
    return rr;
  });
}

std::vector<RiskRadius> compile_constraints(std::span<const ObstacleTimeline> obstacles,
                                            std::size_t t, int horizon,
                                            const ControllerSpec& spec) {
  switch (spec.method) {
    case Method::DR: return compile_risk_constraints(obstacles, t, horizon, spec.risk);
    case Method::SAA: {
      RiskParams r = spec.risk;
      r.theta = 0.0;
      return compile_risk_constraints(obstacles, t, horizon, r);
    }
    case Method::CC: return compile_cc_constraints(obstacles, t, horizon, spec.risk.alpha);
  }
  return {};
}

std::vector<ConstraintPair> active_pairs(const MpcSetup& setup,
                                         std::span<const RiskRadius> radii) {
  const auto& v = setup.vessel;
  std::vector<ConstraintPair> out;
  for (const auto& rr : radii) {
    if (rr.kind == RadiusKind::Free || !(rr.radius_km > 0.0)) continue;
    const double span = static_cast<double>(rr.step) * v.sample_time_h;
    const double lo = std::max(v.x_min, setup.initial_state + span * v.u_min);
    const double hi = std::min(v.x_max, setup.initial_state + span * v.u_max);
    if (hi <= rr.center_km - rr.radius_km || lo >= rr.center_km + rr.radius_km) continue;
    out.push_back({rr.obstacle, rr.step, rr.center_km, rr.radius_km,
                   rr.kind == RadiusKind::Infeasible});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tracking QP

namespace {

struct QuadraticObjective {
  Eigen::MatrixXd G;
  Eigen::VectorXd a;
  double constant = 0.0;

  explicit QuadraticObjective(Eigen::Index n)
      : G(Eigen::MatrixXd::Zero(n, n)), a(Eigen::VectorXd::Zero(n)) {}

  // weight * (coeffs^T v + offset)^2
  void add_square(double weight, const Eigen::VectorXd& coeffs, double offset) {
    if (weight == 0.0) return;
    G.noalias() += 2.0 * weight * coeffs * coeffs.transpose();
    a += 2.0 * weight * offset * coeffs;
    constant += weight * offset * offset;
  }
};

}  // namespace

MpcSolution solve_mpc_qp(const MpcSetup& setup, std::span<const ConstraintPair> pairs,
                         const SideAssignment& sides, bool soften) {
  setup.validate();
  if (sides.sides.size() != pairs.size()) throw DomainError("side assignment does not cover pairs");
  const int K = setup.horizon;
  const double ts = setup.vessel.sample_time_h;
  const double x0 = setup.initial_state;
  const auto& w = setup.weights;

  std::vector<std::size_t> constrained;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (sides.sides[i] != Side::Free) constrained.push_back(i);
  }
  const Eigen::Index nu = K;
  const Eigen::Index ns = soften ? static_cast<Eigen::Index>(constrained.size()) : 0;
  const Eigen::Index n = nu + ns;

  // y_k = x0 + ts * sum_{j<k} u_j
  auto position_coeffs = [&](int k) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < k; ++j) c[j] = ts;
    return c;
  };

  QuadraticObjective obj(n);
  obj.constant += w.q * (x0 - setup.reference[0]) * (x0 - setup.reference[0]);
  for (int k = 1; k <= K; ++k) {
    obj.add_square(k == K ? w.p : w.q, position_coeffs(k), x0 - setup.reference[static_cast<std::size_t>(k)]);
  }
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    c[k] = 1.0;
    double offset = 0.0;
    if (k == 0) {
      offset = -setup.previous_input;
    } else {
      c[k - 1] = -1.0;
    }
    obj.add_square(w.r, c, offset);
  }
  for (Eigen::Index s = 0; s < ns; ++s) {
    obj.G(nu + s, nu + s) += setup.slack_curvature;
    obj.a[nu + s] += setup.slack_penalty;
  }

  std::vector<Eigen::VectorXd> cols;
  std::vector<double> rhs;
  auto add = [&](Eigen::VectorXd c, double b) {
    cols.push_back(std::move(c));
    rhs.push_back(b);
  };
  const auto& v = setup.vessel;
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[k] = 1.0;
    add(e, v.u_min);
    add(-e, -v.u_max);
  }
  for (int k = 1; k <= K; ++k) {
    const auto c = position_coeffs(k);
    add(c, v.x_min - x0);
    add(-c, x0 - v.x_max);
  }
  for (std::size_t s = 0; s < constrained.size(); ++s) {
    const auto& pr = pairs[constrained[s]];
    Eigen::VectorXd c = position_coeffs(pr.step);
    double b = 0.0;
    if (sides.sides[constrained[s]] == Side::Below) {
      c = -c;
      b = x0 - (pr.center_km - pr.radius_km - kClearanceBackoff);
    } else {
      b = pr.center_km + pr.radius_km + kClearanceBackoff - x0;
    }
    if (soften) c[nu + static_cast<Eigen::Index>(s)] = 1.0;
    add(std::move(c), b);
  }
  for (Eigen::Index s = 0; s < ns; ++s) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[nu + s] = 1.0;
    add(e, 0.0);
  }

  QpProblem qp;
  qp.G = obj.G;
  qp.a = obj.a;
  qp.C.resize(n, static_cast<Eigen::Index>(cols.size()));
  qp.b.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    qp.C.col(static_cast<Eigen::Index>(i)) = cols[i];
    qp.b[static_cast<Eigen::Index>(i)] = rhs[i];
  }
  const auto res = solve_qp(qp);

  MpcSolution sol;
  sol.qp_iterations = res.iterations;
  sol.kkt_residual = res.kkt_residual;
  sol.slack.assign(pairs.size(), 0.0);
  if (res.status == QpStatus::Infeasible) {
    sol.status = SolveStatus::InfeasibleHard;
    sol.objective = std::numeric_limits<double>::infinity();
    return sol;
  }
  if (res.status != QpStatus::Optimal) {
    std::ostringstream msg;
    msg << "tracking QP ended " << to_string(res.status) << " after " << res.iterations
        << " iterations (KKT residual " << res.kkt_residual << ")";
    throw NumericalError(msg.str());
  }

  sol.u.resize(static_cast<std::size_t>(K));
  sol.x.resize(static_cast<std::size_t>(K) + 1);
  sol.x[0] = x0;
  for (int k = 0; k < K; ++k) {
    sol.u[static_cast<std::size_t>(k)] = res.x[k];
    sol.x[static_cast<std::size_t>(k) + 1] = v.advance(sol.x[static_cast<std::size_t>(k)], res.x[k]);
  }
  sol.y = sol.x;
  sol.objective = res.objective + obj.constant;
  sol.status = SolveStatus::Optimal;
  for (Eigen::Index s = 0; s < ns; ++s) {
    const double xi = std::max(0.0, res.x[nu + s]);
    sol.slack[constrained[static_cast<std::size_t>(s)]] = xi;
    if (xi > kSlackTolerance) sol.status = SolveStatus::Softened;
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Side search

namespace {

constexpr double kViolationTol = 1e-9;

bool better(double candidate, double incumbent) {
  if (std::isinf(incumbent)) return candidate < incumbent;
  return candidate < incumbent - 1e-12 * std::max(1.0, std::abs(incumbent));
}

void record(SearchStats& stats, const MpcSolution& sol) {
  ++stats.qp_solves;
  stats.qp_iterations += sol.qp_iterations;
  if (sol.status != SolveStatus::InfeasibleHard) {
    stats.max_kkt_residual = std::max(stats.max_kkt_residual, sol.kkt_residual);
  }
}

// Most violated undecided pair, or -1 when the solution clears every undecided pair.
int branching_pair(std::span<const ConstraintPair> pairs, const SideAssignment& sides,
                   const MpcSolution& sol) {
  int best = -1;
  double worst = kViolationTol;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (sides.sides[i] != Side::Free) continue;
    const auto& pr = pairs[i];
    const double v = pr.radius_km - std::abs(sol.y[static_cast<std::size_t>(pr.step)] - pr.center_km);
    if (v > worst) {
      worst = v;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

SideSearchResult branch_and_bound(const MpcSetup& setup, std::span<const ConstraintPair> pairs,
                                  bool soften) {
  SideSearchResult out;
  double incumbent = std::numeric_limits<double>::infinity();

  auto solve = [&](const SideAssignment& sides) {
    auto sol = solve_mpc_qp(setup, pairs, sides, soften);
    record(out.stats, sol);
    return sol;
  };

  // Seed: side of each obstacle implied by the reference at that step.
  if (!pairs.empty()) {
    SideAssignment seed;
    for (const auto& pr : pairs) {
      seed.sides.push_back(setup.reference[static_cast<std::size_t>(pr.step)] < pr.center_km
                               ? Side::Below
                               : Side::Above);
    }
    auto sol = solve(seed);
    if (sol.status != SolveStatus::InfeasibleHard) {
      incumbent = sol.objective;
      out.found = true;
      out.solution = std::move(sol);
      out.sides = std::move(seed);
    }
  }

  struct Node {
    double bound;
    long id;
    SideAssignment sides;
    MpcSolution sol;
  };
  auto cmp = [](const Node& a, const Node& b) {
    return a.bound != b.bound ? a.bound > b.bound : a.id > b.id;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);
  long next_id = 0;

  SideAssignment root{std::vector<Side>(pairs.size(), Side::Free)};
  auto root_sol = solve(root);
  if (root_sol.status == SolveStatus::InfeasibleHard) return out;
  open.push({root_sol.objective, next_id++, std::move(root), std::move(root_sol)});

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    ++out.stats.nodes;
    if (!better(node.bound, incumbent)) continue;
    const int br = branching_pair(pairs, node.sides, node.sol);
    if (br < 0) {
      incumbent = node.bound;
      out.found = true;
      out.solution = std::move(node.sol);
      out.sides = std::move(node.sides);
      continue;
    }
    for (Side side : {Side::Below, Side::Above}) {
      SideAssignment child = node.sides;
      child.sides[static_cast<std::size_t>(br)] = side;
      auto sol = solve(child);
      if (sol.status == SolveStatus::InfeasibleHard || !better(sol.objective, incumbent)) continue;
      open.push({sol.objective, next_id++, std::move(child), std::move(sol)});
    }
  }
  return out;
}

SideSearchResult enumerate_sides(const MpcSetup& setup, std::span<const ConstraintPair> pairs,
                                 bool soften) {
  if (pairs.size() > 24) throw DomainError("too many pairs for exhaustive side enumeration");
  SideSearchResult out;
  double best = std::numeric_limits<double>::infinity();
  const std::uint64_t total = std::uint64_t{1} << pairs.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    SideAssignment sides;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      sides.sides.push_back((mask >> i) & 1U ? Side::Above : Side::Below);
    }
    auto sol = solve_mpc_qp(setup, pairs, sides, soften);
    record(out.stats, sol);
    ++out.stats.nodes;
    if (sol.status != SolveStatus::InfeasibleHard && sol.objective < best) {
      best = sol.objective;
      out.found = true;
      out.solution = std::move(sol);
      out.sides = std::move(sides);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Controller steps

StepResult mpc_step(const MpcSetup& setup, std::span<const ObstacleTimeline> obstacles,
                    std::size_t t, const ControllerSpec& spec) {
  setup.validate();
  const auto radii = compile_constraints(obstacles, t, setup.horizon, spec);
  StepResult out;
  out.pairs = active_pairs(setup, radii);
  out.diagnostics.active_pairs = static_cast<int>(out.pairs.size());
  out.diagnostics.infeasible_pairs = static_cast<int>(std::count_if(
      out.pairs.begin(), out.pairs.end(), [](const auto& p) { return p.risk_infeasible; }));

  auto search = branch_and_bound(setup, out.pairs, false);
  if (!search.found) {
    auto soft = branch_and_bound(setup, out.pairs, true);
    soft.stats.nodes += search.stats.nodes;
    soft.stats.qp_solves += search.stats.qp_solves;
    soft.stats.qp_iterations += search.stats.qp_iterations;
    soft.stats.max_kkt_residual = std::max(soft.stats.max_kkt_residual, search.stats.max_kkt_residual);
    search = std::move(soft);
    out.diagnostics.softened_search = true;
  }
  out.diagnostics.search = search.stats;
  if (!search.found) {
    std::ostringstream msg;
    msg << "no solution at t=" << t << " even with softened constraints (" << out.pairs.size()
        << " active pairs, " << search.stats.qp_solves << " QP solves)";
    throw NumericalError(msg.str());
  }
  out.solution = std::move(search.solution);
  out.sides = std::move(search.sides);
  out.input = out.solution.u.front();
  return out;
}

StepResult dr_mpc_step(const MpcSetup& setup, std::span<const ObstacleTimeline> obstacles,
                       std::size_t t, const RiskParams& risk) {
  return mpc_step(setup, obstacles, t, {Method::DR, risk});
}

StepResult saa_mpc_step(const MpcSetup& setup, std::span<const ObstacleTimeline> obstacles,
                        std::size_t t, RiskParams risk) {
  risk.theta = 0.0;
  return mpc_step(setup, obstacles, t, {Method::SAA, risk});
}

StepResult cc_mpc_step(const MpcSetup& setup, std::span<const ObstacleTimeline> obstacles,
                       std::size_t t, double alpha) {
  RiskParams risk;
  risk.alpha = alpha;
  return mpc_step(setup, obstacles, t, {Method::CC, risk});
}

// ---------------------------------------------------------------------------
// Closed loop

ClosedLoopTrace receding_horizon_run(const StepFunction& controller, const MpcSetup& setup_template,
                                     std::span<const double> reference, std::size_t steps,
                                     double initial_state, double initial_input) {
  if (reference.empty()) throw DomainError("reference trajectory is empty");
  const auto K = static_cast<std::size_t>(setup_template.horizon);
  auto tau = [&](std::size_t i) { return reference[std::min(i, reference.size() - 1)]; };

  ClosedLoopTrace trace;
  trace.y.push_back(initial_state);
  trace.reference.push_back(tau(0));
  double prev_u = initial_input;
  for (std::size_t t = 0; t < steps; ++t) {
    MpcSetup setup = setup_template;
    setup.initial_state = trace.y.back();
    setup.previous_input = prev_u;
    setup.reference.resize(K + 1);
    for (std::size_t k = 0; k <= K; ++k) setup.reference[k] = tau(t + k);

    StepResult step;
    try {
      step = controller(setup, t);
    } catch (const NumericalError& e) {
      trace.aborted = true;
      trace.error = e.what();
      return trace;
    }
    StepRecord rec;
    rec.t = t;
    rec.time_h = static_cast<double>(t) * setup.vessel.sample_time_h;
    rec.state = setup.initial_state;
    rec.input = step.input;
    rec.status = step.solution.status;
    rec.objective = step.solution.objective;
    rec.diagnostics = step.diagnostics;
    rec.kkt_residual = step.solution.kkt_residual;
    for (double s : step.solution.slack) rec.max_slack = std::max(rec.max_slack, s);
    trace.log.push_back(rec);

    trace.u.push_back(step.input);
    trace.y.push_back(setup.vessel.advance(setup.initial_state, step.input));
    trace.reference.push_back(tau(t + 1));
    prev_u = step.input;
  }
  return trace;
}

ClosedLoopTrace receding_horizon_run(const ControllerConfig& config,
                                     std::span<const ObstacleTimeline> obstacles,
                                     std::span<const double> reference, std::size_t steps,
                                     double initial_state, double initial_input) {
  MpcSetup tmpl;
  tmpl.vessel = config.vessel;
  tmpl.horizon = config.horizon;
  tmpl.weights = config.weights;
  tmpl.slack_penalty = config.slack_penalty;
  tmpl.slack_curvature = config.slack_curvature;
  tmpl.reference.assign(static_cast<std::size_t>(config.horizon) + 1, 0.0);
  const auto spec = config.spec;
  auto step = [&](const MpcSetup& setup, std::size_t t) {
    return mpc_step(setup, obstacles, t, spec);
  };
  return receding_horizon_run(step, tmpl, reference, steps, initial_state, initial_input);
}

}  // namespace tidenav
