#include "tidenav/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tidenav/error.hpp"

namespace tidenav {

void LinearProgram::add_row(std::vector<double> coeffs, RowSense sense, double rhs) {
  if (coeffs.size() != cost.size()) throw DomainError("LP row width does not match cost vector");
  rows.push_back({std::move(coeffs), sense, rhs});
}

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

// Dense tableau; row m holds the reduced costs, last column the right-hand side.
struct Tableau {
  std::size_t m = 0, n = 0;
  std::vector<double> a;  // (m + 1) x (n + 1)
  std::vector<std::size_t> basis;

  double& at(std::size_t i, std::size_t j) { return a[i * (n + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * (n + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n); }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= n; ++j) at(r, j) /= p;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n; ++j) at(i, j) -= f * at(r, j);
    }
    basis[r] = c;
  }

  void load_cost(const std::vector<double>& c) {
    for (std::size_t j = 0; j <= n; ++j) at(m, j) = j < c.size() ? c[j] : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = at(m, basis[i]);
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= n; ++j) at(m, j) -= cb * at(i, j);
    }
  }

  // Bland's rule; `allowed` masks columns that may enter.
  LpStatus run(const std::vector<char>& allowed, int& iterations, int max_iterations) {
    while (iterations < max_iterations) {
      std::size_t enter = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (allowed[j] && at(m, j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter == n) return LpStatus::Optimal;
      std::size_t leave = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const double col = at(i, enter);
        if (col <= kPivotTol) continue;
        const double ratio = at(i, n) / col;
        if (ratio < best - 1e-14 || (ratio <= best + 1e-14 && leave < m && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m) return LpStatus::Unbounded;
      pivot(leave, enter);
      ++iterations;
    }
    return LpStatus::IterationLimit;
  }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, int max_iterations) {
  const std::size_t nv = lp.variables();
  const std::size_t m = lp.rows.size();
  std::size_t n_slack = 0;
  for (const auto& r : lp.rows) n_slack += r.sense != RowSense::Equal;

  const std::size_t n_art_start = nv + n_slack;
  Tableau t;
  t.m = m;
  t.n = n_art_start + m;
  t.a.assign((m + 1) * (t.n + 1), 0.0);
  t.basis.resize(m);

  std::size_t slack_col = nv;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < nv; ++j) t.at(i, j) = sign * row.coeffs[j];
    if (row.sense != RowSense::Equal) {
      t.at(i, slack_col++) = sign * (row.sense == RowSense::LessEqual ? 1.0 : -1.0);
    }
    t.at(i, n_art_start + i) = 1.0;
    t.rhs(i) = sign * row.rhs;
    t.basis[i] = n_art_start + i;
  }

  LpSolution sol;
  int iterations = 0;

  // Phase 1: minimize the sum of artificials.
  std::vector<double> phase1(t.n, 0.0);
  for (std::size_t i = 0; i < m; ++i) phase1[n_art_start + i] = 1.0;
  t.load_cost(phase1);
  std::vector<char> allowed(t.n, 1);
  auto status = t.run(allowed, iterations, max_iterations);
  if (status == LpStatus::IterationLimit) {
    sol.status = status;
    sol.iterations = iterations;
    return sol;
  }
  double infeas = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis[i] >= n_art_start) infeas += t.at(i, t.n);
  }
  if (infeas > 1e-9) {
    sol.status = LpStatus::Infeasible;
    sol.iterations = iterations;
    return sol;
  }

  // Drive zero-level artificials out of the basis; rows that cannot be pivoted are redundant.
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis[i] < n_art_start) continue;
    for (std::size_t j = 0; j < n_art_start; ++j) {
      if (std::abs(t.at(i, j)) > 1e-9) {
        t.pivot(i, j);
        break;
      }
    }
  }
  for (std::size_t j = n_art_start; j < t.n; ++j) allowed[j] = 0;

  // Phase 2.
  std::vector<double> phase2(t.n, 0.0);
  std::copy(lp.cost.begin(), lp.cost.end(), phase2.begin());
  t.load_cost(phase2);
  status = t.run(allowed, iterations, max_iterations);

  sol.status = status;
  sol.iterations = iterations;
  sol.x.assign(nv, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis[i] < nv) sol.x[t.basis[i]] = t.at(i, t.n);
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < nv; ++j) sol.objective += lp.cost[j] * sol.x[j];

  double resid = 0.0;
  for (const auto& row : lp.rows) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < nv; ++j) lhs += row.coeffs[j] * sol.x[j];
    const double v = lhs - row.rhs;
    switch (row.sense) {
      case RowSense::LessEqual: resid = std::max(resid, v); break;
      case RowSense::GreaterEqual: resid = std::max(resid, -v); break;
      case RowSense::Equal: resid = std::max(resid, std::abs(v)); break;
    }
  }
  for (double v : sol.x) resid = std::max(resid, -v);
  sol.primal_residual = resid;
  return sol;
}

}  // namespace tidenav
