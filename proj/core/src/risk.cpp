#include "tidenav/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "tidenav/error.hpp"
#include "tidenav/lp.hpp"

namespace tidenav {

double HalfspaceObstacle::min_row_value(double y) const {
  const auto v = row_values(y);
  return std::min(v[0], v[1]);
}

void RiskParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (!(delta >= 0.0)) throw DomainError("delta must be non-negative");
  if (!(theta >= 0.0)) throw DomainError("theta must be non-negative");
}

double safety_loss(double y, const HalfspaceObstacle& obstacle, double omega) {
  if (!(omega >= 0.0)) throw DomainError("obstacle radius must be non-negative");
  return std::max(0.0, omega + obstacle.min_row_value(y));
}

double safety_loss_oracle(double y, const HalfspaceObstacle& obstacle, double omega) {
  if (!(omega >= 0.0)) throw DomainError("obstacle radius must be non-negative");
  const double lo = obstacle.center_km - omega;
  const double hi = obstacle.center_km + omega;
  // The safe set is (-inf, lo] U [hi, inf); its projection is y itself when y is outside (lo, hi).
  if (y <= lo || y >= hi) return 0.0;
  return std::min(std::abs(y - lo), std::abs(hi - y));
}

double cvar(std::span<const double> losses, double alpha) {
  if (losses.empty()) throw DomainError("cvar of an empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const double n = static_cast<double>(losses.size());
  double best = std::numeric_limits<double>::infinity();
  for (double z : losses) {
    double tail = 0.0;
    for (double x : losses) tail += std::max(0.0, x - z);
    best = std::min(best, z + tail / (n * (1.0 - alpha)));
  }
  return best;
}

double w1_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  std::vector<double> x(a.samples().begin(), a.samples().end());
  std::vector<double> y(b.samples().begin(), b.samples().end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  if (x.size() == y.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
    return s / static_cast<double>(x.size());
  }
  // Integral of |F_a - F_b| over the merged support.
  std::vector<double> pts;
  pts.reserve(x.size() + y.size());
  std::merge(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(pts));
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  double total = 0.0;
  std::size_t ix = 0, iy = 0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    while (ix < x.size() && x[ix] <= pts[k]) ++ix;
    while (iy < y.size() && y[iy] <= pts[k]) ++iy;
    total += std::abs(static_cast<double>(ix) / nx - static_cast<double>(iy) / ny) *
             (pts[k + 1] - pts[k]);
  }
  return total;
}

double w1_distance_lp(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  const std::size_t n1 = a.size(), n2 = b.size();
  LinearProgram lp;
  lp.cost.resize(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      lp.cost[i * n2 + j] = std::abs(a.samples()[i] - b.samples()[j]);
    }
  }
  for (std::size_t i = 0; i < n1; ++i) {
    std::vector<double> row(n1 * n2, 0.0);
    for (std::size_t j = 0; j < n2; ++j) row[i * n2 + j] = 1.0;
    lp.add_row(std::move(row), RowSense::Equal, a.weight());
  }
  for (std::size_t j = 0; j < n2; ++j) {
    std::vector<double> row(n1 * n2, 0.0);
    for (std::size_t i = 0; i < n1; ++i) row[i * n2 + j] = 1.0;
    lp.add_row(std::move(row), RowSense::Equal, b.weight());
  }
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) {
    throw NumericalError("transport LP ended " + to_string(sol.status));
  }
  return sol.objective;
}

InnerSupResult inner_sup_lp(const EmpiricalDistribution& dist, double y,
                            const HalfspaceObstacle& obstacle, double z, double theta) {
  if (!(theta >= 0.0)) throw DomainError("theta must be non-negative");
  const auto rows = obstacle.row_values(y);
  InnerSupResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < 2; ++j) {
    DualCertificate cert;
    cert.z = z;
    cert.lambda = 1.0;
    cert.rho = {j == 0 ? 1.0 : 0.0, j == 1 ? 1.0 : 0.0};
    cert.s.resize(dist.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      cert.s[i] = std::max({dist.samples()[i] + rows[j] - z, -z, 0.0});
      sum += cert.s[i];
    }
    const double value = cert.lambda * theta + sum / static_cast<double>(dist.size());
    if (value < best.value) best = {value, std::move(cert)};
  }
  return best;
}

InnerSupResult inner_sup_full_lp(const EmpiricalDistribution& dist, double y,
                                 const HalfspaceObstacle& obstacle, double z, double theta) {
  if (!(theta >= 0.0)) throw DomainError("theta must be non-negative");
  const std::size_t n = dist.size();
  // Variables: [lambda - 1, s_1..s_n, rho_1, rho_2], all >= 0.
  const std::size_t nv = n + 3;
  const std::size_t rho0 = n + 1;
  LinearProgram lp;
  lp.cost.assign(nv, 0.0);
  lp.cost[0] = theta;
  for (std::size_t i = 0; i < n; ++i) lp.cost[1 + i] = 1.0 / static_cast<double>(n);

  const auto a = HalfspaceObstacle::kRows;
  const double gap = obstacle.center_km - y;
  for (std::size_t i = 0; i < n; ++i) {
    // w_i + rho^T A (c - y) <= s_i + z
    std::vector<double> row(nv, 0.0);
    row[1 + i] = -1.0;
    row[rho0] = a[0] * gap;
    row[rho0 + 1] = a[1] * gap;
    lp.add_row(std::move(row), RowSense::LessEqual, z - dist.samples()[i]);
    // s_i + z >= 0
    std::vector<double> lower(nv, 0.0);
    lower[1 + i] = 1.0;
    lp.add_row(std::move(lower), RowSense::GreaterEqual, -z);
  }
  std::vector<double> simplex(nv, 0.0);
  simplex[rho0] = simplex[rho0 + 1] = 1.0;
  lp.add_row(std::move(simplex), RowSense::Equal, 1.0);

  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal || sol.primal_residual > 1e-8) {
    std::ostringstream msg;
    msg << "worst-case expectation LP ended " << to_string(sol.status)
        << " (primal residual " << sol.primal_residual << ", " << sol.iterations << " pivots)";
    throw NumericalError(msg.str());
  }
  InnerSupResult out;
  out.value = theta + sol.objective;
  out.certificate.z = z;
  out.certificate.lambda = 1.0 + sol.x[0];
  out.certificate.s.assign(sol.x.begin() + 1, sol.x.begin() + 1 + static_cast<std::ptrdiff_t>(n));
  out.certificate.rho = {sol.x[rho0], sol.x[rho0 + 1]};
  return out;
}

double inner_sup_closed(const EmpiricalDistribution& dist, double y,
                        const HalfspaceObstacle& obstacle, double z, double theta) {
  if (!(theta >= 0.0)) throw DomainError("theta must be non-negative");
  const double m = obstacle.min_row_value(y);
  double sum = 0.0;
  for (double w : dist.samples()) sum += std::max({w + m - z, -z, 0.0});
  return theta + sum / static_cast<double>(dist.size());
}

double dr_cvar(const EmpiricalDistribution& dist, double y, const HalfspaceObstacle& obstacle,
               double alpha, double theta) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (!(theta >= 0.0)) throw DomainError("theta must be non-negative");
  const double m = obstacle.min_row_value(y);
  auto objective = [&](double z) {
    return z + inner_sup_closed(dist, y, obstacle, z, theta) / (1.0 - alpha);
  };
  double best = objective(0.0);
  for (double w : dist.samples()) best = std::min(best, objective(w + m));
  return best;
}

double dr_cvar_at_distance(const EmpiricalDistribution& dist, double distance, double alpha,
                           double theta) {
  const HalfspaceObstacle origin{0.0};
  return dr_cvar(dist, distance, origin, alpha, theta);
}

SafeRadius safe_radius(const EmpiricalDistribution& dist, const RiskParams& risk) {
  risk.validate();
  if (risk.value_floor() > risk.delta) return SafeRadius::infeasible();

  auto f = [&](double d) { return dr_cvar_at_distance(dist, d, risk.alpha, risk.theta); };
  if (f(0.0) <= risk.delta) return {true, 0.0};

  // dr_cvar(d) is convex, nonincreasing and linear between consecutive sample values.
  std::vector<double> knots{0.0};
  for (double w : dist.samples()) {
    if (w > 0.0) knots.push_back(w);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  double prev_d = knots.front(), prev_f = f(prev_d);
  for (std::size_t k = 1; k < knots.size(); ++k) {
    const double d = knots[k], fd = f(d);
    if (fd <= risk.delta) {
      const double frac = (prev_f - risk.delta) / (prev_f - fd);
      return {true, prev_d + frac * (d - prev_d)};
    }
    prev_d = d;
    prev_f = fd;
  }
  // At the largest sample every loss is zero and f equals the floor, which is <= delta.
  return {true, knots.back()};
}

SafeRadius safe_radius_bisection(const EmpiricalDistribution& dist, const RiskParams& risk,
                                 double tol) {
  risk.validate();
  if (risk.value_floor() > risk.delta) return SafeRadius::infeasible();
  auto ok = [&](double d) {
    return dr_cvar_at_distance(dist, d, risk.alpha, risk.theta) <= risk.delta;
  };
  if (ok(0.0)) return {true, 0.0};
  double lo = 0.0, hi = std::max(dist.max(), 0.0);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return {true, hi};
}

double soft_radius(const EmpiricalDistribution& dist, const RiskParams& risk) {
  return std::max(0.0, dist.max()) + std::max(0.0, risk.value_floor() - risk.delta);
}

}  // namespace tidenav
