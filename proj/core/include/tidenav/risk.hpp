#pragma once

// Safety-loss geometry, CVaR, the order-1 Wasserstein distance and the worst-case
// CVaR of obstacle penetration over a Wasserstein ball around an empirical
// distribution of obstacle radii.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "tidenav/tide_field.hpp"

namespace tidenav {

/// Interval obstacle |x - center| <= omega written as two half-spaces A (x - center) <= omega
/// with A = (+1, -1).
struct HalfspaceObstacle {
  static constexpr std::array<double, 2> kRows{+1.0, -1.0};

  double center_km = 0.0;

  /// A_j (center - y) for j = 1, 2.
  std::array<double, 2> row_values(double y) const {
    return {kRows[0] * (center_km - y), kRows[1] * (center_km - y)};
  }
  /// min_j A_j (center - y), i.e. -|center - y|.
  double min_row_value(double y) const;
};

struct RiskParams {
  double alpha = 0.95;  // CVaR confidence level, 0 < alpha < 1
  double delta = 0.02;  // risk tolerance (km)
  double theta = 0.0;   // Wasserstein radius (km)

  void validate() const;
  /// theta / (1 - alpha): the smallest attainable worst-case CVaR on unbounded support.
  double value_floor() const { return theta / (1.0 - alpha); }

  bool operator==(const RiskParams&) const = default;
};

struct DualCertificate {
  double z = 0.0;
  double lambda = 1.0;
  std::vector<double> s;
  std::array<double, 2> rho{1.0, 0.0};
};

struct InnerSupResult {
  double value = 0.0;
  DualCertificate certificate;
};

/// [omega + min_j A_j (center - y)]^+ : penetration depth into the obstacle.
double safety_loss(double y, const HalfspaceObstacle& obstacle, double omega);

/// Distance from y to the safe set, by projecting onto the boundary points center -/+ omega.
double safety_loss_oracle(double y, const HalfspaceObstacle& obstacle, double omega);

/// CVaR_alpha of an equally weighted loss sample: min_z z + mean((X - z)^+) / (1 - alpha).
double cvar(std::span<const double> losses, double alpha);

/// Order-1 Wasserstein distance between 1-D empirical distributions.
/// Equal sizes: mean |sorted difference|. Otherwise the CDF-difference integral.
double w1_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// Same distance from the transport-plan linear program.
double w1_distance_lp(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// Worst-case expectation of max{omega + min_j A_j(c - y) - z, -z, 0} over the Wasserstein
/// ball, via its dual program. The program is linear in rho on the simplex, so both
/// vertices are tried and the better one kept; lambda is always 1.
InnerSupResult inner_sup_lp(const EmpiricalDistribution& dist, double y,
                            const HalfspaceObstacle& obstacle, double z, double theta);

/// The same dual program solved as a general LP over (lambda, s, rho) with the simplex method.
/// Throws NumericalError with the residual if the solver does not terminate optimally.
InnerSupResult inner_sup_full_lp(const EmpiricalDistribution& dist, double y,
                                 const HalfspaceObstacle& obstacle, double z, double theta);

/// theta + mean_i max{w_i - |c - y| - z, -z, 0}.
double inner_sup_closed(const EmpiricalDistribution& dist, double y,
                        const HalfspaceObstacle& obstacle, double z, double theta);

/// min_z z + inner_sup_closed(z) / (1 - alpha), evaluated exactly at the objective's breakpoints.
double dr_cvar(const EmpiricalDistribution& dist, double y, const HalfspaceObstacle& obstacle,
               double alpha, double theta);

/// dr_cvar with the vessel at distance d >= 0 from the obstacle center.
double dr_cvar_at_distance(const EmpiricalDistribution& dist, double distance, double alpha,
                           double theta);

/// Least center distance at which the worst-case CVaR meets the tolerance.
struct SafeRadius {
  bool feasible = true;
  double radius = 0.0;

  static SafeRadius infeasible() { return {false, 0.0}; }
};

/// Exact, by breakpoint analysis of the piecewise-linear dr_cvar(d).
/// Infeasible iff theta / (1 - alpha) > delta.
SafeRadius safe_radius(const EmpiricalDistribution& dist, const RiskParams& risk);

/// Monotone bisection on dr_cvar(d) <= delta, to `tol` km.
SafeRadius safe_radius_bisection(const EmpiricalDistribution& dist, const RiskParams& risk,
                                 double tol = 1e-9);

/// Radius used when the tolerance is below the value floor: the distance that
/// zeroes every sampled loss (max sample), pushed out by the floor excess so the
/// radius stays continuous and increasing in theta across the feasibility boundary.
double soft_radius(const EmpiricalDistribution& dist, const RiskParams& risk);

}  // namespace tidenav
