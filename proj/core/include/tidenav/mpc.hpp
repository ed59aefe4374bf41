#pragma once

// Receding-horizon tracking controllers for a single-integrator vessel that must
// keep clear of interval obstacles. Each obstacle/step pair contributes a radius
// r*; the avoidance constraint |y_k - center| >= r* is the disjunction
// "pass below" (y_k <= center - r*) or "pass above" (y_k >= center + r*). With the
// sides fixed the problem is a convex QP; a best-first branch and bound over the
// sides finds the global optimum.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tidenav/risk.hpp"
#include "tidenav/tide_field.hpp"

namespace tidenav {

struct VesselModel {
  double sample_time_h = 0.1;
  double u_min = 0.0;
  double u_max = 25.0;
  double x_min = 0.0;
  double x_max = 100.0;

  void validate() const;
  double advance(double x, double u) const { return x + sample_time_h * u; }

  bool operator==(const VesselModel&) const = default;
};

struct CostWeights {
  double q = 1.0;  // stage tracking
  double p = 1.0;  // terminal tracking
  double r = 0.1;  // input increments

  bool operator==(const CostWeights&) const = default;
};

struct MpcSetup {
  VesselModel vessel{};
  int horizon = 10;
  CostWeights weights{};
  double initial_state = 0.0;
  std::vector<double> reference;  // tau_0 .. tau_K
  double previous_input = 0.0;    // u(t-1); Delta u_0 = u_0 - previous_input
  double slack_penalty = 1e6;     // linear price per km of softened violation
  double slack_curvature = 1.0;   // keeps the softened QP strictly convex

  void validate() const;
};

enum class Method { DR, SAA, CC };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct ControllerSpec {
  Method method = Method::DR;
  RiskParams risk{};

  bool operator==(const ControllerSpec&) const = default;
};

enum class RadiusKind { Active, Free, Infeasible };

/// Radius for obstacle `obstacle` (index into the timeline list) at horizon step `step` (1..K).
struct RiskRadius {
  std::size_t obstacle = 0;
  int step = 0;
  double center_km = 0.0;
  double radius_km = 0.0;  // soft radius when kind == Infeasible
  RadiusKind kind = RadiusKind::Free;
};

/// Safe radii of every (obstacle, step) pair for the window starting at time index t.
std::vector<RiskRadius> compile_risk_constraints(std::span<const ObstacleTimeline> obstacles,
                                                 std::size_t t, int horizon,
                                                 const RiskParams& risk);

/// Gaussian-approximation chance-constraint radius mean + z_alpha * sd (sd with divisor N-1).
/// A single sample is returned unchanged.
double cc_radius(std::span<const double> samples, double alpha);

std::vector<RiskRadius> compile_cc_constraints(std::span<const ObstacleTimeline> obstacles,
                                               std::size_t t, int horizon, double alpha);

std::vector<RiskRadius> compile_constraints(std::span<const ObstacleTimeline> obstacles,
                                            std::size_t t, int horizon,
                                            const ControllerSpec& spec);

/// A pair that can actually bind within the reachable set of the current state.
struct ConstraintPair {
  std::size_t obstacle = 0;
  int step = 0;
  double center_km = 0.0;
  double radius_km = 0.0;
  bool risk_infeasible = false;
};

/// Drops FREE radii and pairs whose obstacle interval cannot be reached at that step.
std::vector<ConstraintPair> active_pairs(const MpcSetup& setup,
                                         std::span<const RiskRadius> radii);

enum class Side { Below, Above, Free };

/// One side per constraint pair, aligned with the pair list.
struct SideAssignment {
  std::vector<Side> sides;
};

enum class SolveStatus { Optimal, Softened, InfeasibleHard };

std::string to_string(SolveStatus s);

struct MpcSolution {
  std::vector<double> u;  // K
  std::vector<double> x;  // K + 1
  std::vector<double> y;  // K + 1
  double objective = 0.0;
  SolveStatus status = SolveStatus::InfeasibleHard;
  std::vector<double> slack;  // per pair (0 for FREE sides)
  int qp_iterations = 0;
  double kkt_residual = 0.0;
};

inline constexpr double kSlackTolerance = 1e-7;
/// Side constraints are tightened by this much (km) so round-off in the propagated state
/// never turns an exactly active clearance into a penetration.
inline constexpr double kClearanceBackoff = 1e-9;

/// Tracking QP with fixed sides; soften adds a penalized slack to every non-FREE side.
MpcSolution solve_mpc_qp(const MpcSetup& setup, std::span<const ConstraintPair> pairs,
                         const SideAssignment& sides, bool soften);

struct SearchStats {
  int nodes = 0;
  int qp_solves = 0;
  int qp_iterations = 0;
  double max_kkt_residual = 0.0;
};

struct SideSearchResult {
  bool found = false;
  MpcSolution solution;
  SideAssignment sides;
  SearchStats stats;
};

/// Best-first branch and bound over sides. Node bounds are QPs with undecided pairs
/// relaxed; the incumbent is seeded with the sides implied by the reference.
SideSearchResult branch_and_bound(const MpcSetup& setup, std::span<const ConstraintPair> pairs,
                                  bool soften);

/// Solves every one of the 2^P side assignments. Test oracle for branch_and_bound.
SideSearchResult enumerate_sides(const MpcSetup& setup, std::span<const ConstraintPair> pairs,
                                 bool soften);

struct StepDiagnostics {
  int active_pairs = 0;
  int infeasible_pairs = 0;  // pairs whose tolerance is below the value floor
  bool softened_search = false;
  SearchStats search;
};

struct StepResult {
  double input = 0.0;
  MpcSolution solution;
  std::vector<ConstraintPair> pairs;
  SideAssignment sides;
  StepDiagnostics diagnostics;
};

/// One controller step: compile radii, search sides (hard first, softened if no hard
/// assignment is feasible), return u_0 of the best solution.
StepResult mpc_step(const MpcSetup& setup, std::span<const ObstacleTimeline> obstacles,
                    std::size_t t, const ControllerSpec& spec);

StepResult dr_mpc_step(const MpcSetup& setup, std::span<const ObstacleTimeline> obstacles,
                       std::size_t t, const RiskParams& risk);
StepResult saa_mpc_step(const MpcSetup& setup, std::span<const ObstacleTimeline> obstacles,
                        std::size_t t, RiskParams risk);
StepResult cc_mpc_step(const MpcSetup& setup, std::span<const ObstacleTimeline> obstacles,
                       std::size_t t, double alpha);

/// Everything a controller step needs except the current state, window and u(t-1).
struct ControllerConfig {
  VesselModel vessel{};
  int horizon = 10;
  CostWeights weights{};
  double slack_penalty = 1e6;
  double slack_curvature = 1.0;
  ControllerSpec spec{};
};

/// Audit record of one MPC solve.
struct StepRecord {
  std::size_t t = 0;
  double time_h = 0.0;
  double state = 0.0;
  double input = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  double objective = 0.0;
  StepDiagnostics diagnostics;
  double max_slack = 0.0;
  double kkt_residual = 0.0;
};

struct ClosedLoopTrace {
  std::vector<double> y;  // steps + 1 positions
  std::vector<double> u;  // steps inputs
  std::vector<double> reference;
  std::vector<StepRecord> log;
  bool aborted = false;
  std::string error;
};

using StepFunction =
    std::function<StepResult(const MpcSetup& setup, std::size_t t)>;

/// Closed loop over `steps` sampling periods. `reference` holds tau at every step index and
/// is padded with its last value beyond its end. The setup template supplies vessel,
/// weights and horizon; state, window reference and previous input are filled in per step.
ClosedLoopTrace receding_horizon_run(const StepFunction& controller, const MpcSetup& setup_template,
                                     std::span<const double> reference, std::size_t steps,
                                     double initial_state, double initial_input);

/// Convenience wrapper binding a ControllerConfig and obstacle set.
ClosedLoopTrace receding_horizon_run(const ControllerConfig& config,
                                     std::span<const ObstacleTimeline> obstacles,
                                     std::span<const double> reference, std::size_t steps,
                                     double initial_state, double initial_input);

}  // namespace tidenav
