#pragma once

// Small dense two-phase simplex. Used for the transport-plan form of the order-1
// Wasserstein distance and the full dual form of the worst-case expectation; both
// have at most a few hundred variables.

#include <cstddef>
#include <string>
#include <vector>

namespace tidenav {

enum class RowSense { LessEqual, Equal, GreaterEqual };

/// minimize cost^T x  subject to  rows, x >= 0.
struct LinearProgram {
  struct Row {
    std::vector<double> coeffs;
    RowSense sense = RowSense::Equal;
    double rhs = 0.0;
  };

  std::vector<double> cost;
  std::vector<Row> rows;

  std::size_t variables() const { return cost.size(); }
  void add_row(std::vector<double> coeffs, RowSense sense, double rhs);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  double primal_residual = 0.0;  // max row violation at x
  int iterations = 0;
};

LpSolution solve_lp(const LinearProgram& lp, int max_iterations = 20000);

}  // namespace tidenav
