#pragma once

// Dense strictly convex QP
//
//   minimize   0.5 x^T G x + a^T x
//   subject to C^T x >= b
//
// solved with the Goldfarb-Idnani dual active-set method. The method starts from the
// unconstrained minimizer, so no feasible starting point is needed, and it proves
// infeasibility when a violated constraint cannot be added. Problem sizes here are a
// few dozen variables, so projections are recomputed from scratch at every step.

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace tidenav {

struct QpProblem {
  Eigen::MatrixXd G;  // n x n, symmetric positive definite
  Eigen::VectorXd a;  // n
  Eigen::MatrixXd C;  // n x m, one column per inequality
  Eigen::VectorXd b;  // m
};

enum class QpStatus { Optimal, Infeasible, IterationLimit };

std::string to_string(QpStatus s);

struct QpResult {
  QpStatus status = QpStatus::IterationLimit;
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // m, zero for inactive constraints
  std::vector<int> active;
  double objective = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
};

struct QpOptions {
  double feasibility_tol = 1e-10;
  int max_iterations = 0;  // 0 -> 10 * (n + m)
};

QpResult solve_qp(const QpProblem& problem, const QpOptions& options = {});

/// max of stationarity, primal, dual and complementarity residuals.
double kkt_residual(const QpProblem& problem, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& multipliers);

}  // namespace tidenav
