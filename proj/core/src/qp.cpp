#include "tidenav/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tidenav/error.hpp"

namespace tidenav {

std::string to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

double kkt_residual(const QpProblem& qp, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& multipliers) {
  const Eigen::VectorXd grad = qp.G * x + qp.a - qp.C * multipliers;
  double r = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
  const Eigen::VectorXd slack = qp.C.transpose() * x - qp.b;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    r = std::max(r, -slack[i]);
    r = std::max(r, -multipliers[i]);
    r = std::max(r, std::abs(multipliers[i] * slack[i]));
  }
  return r;
}

namespace {

struct ActiveSetStep {
  Eigen::VectorXd z;  // primal direction
  Eigen::VectorXd r;  // dual direction
};

ActiveSetStep directions(const Eigen::MatrixXd& ginv, const Eigen::MatrixXd& C,
                         const std::vector<int>& active, const Eigen::VectorXd& np) {
  ActiveSetStep d;
  const Eigen::VectorXd gnp = ginv * np;
  if (active.empty()) {
    d.z = gnp;
    d.r.resize(0);
    return d;
  }
  Eigen::MatrixXd N(C.rows(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j) N.col(static_cast<Eigen::Index>(j)) = C.col(active[j]);
  const Eigen::MatrixXd gn = ginv * N;
  const Eigen::MatrixXd M = N.transpose() * gn;
  d.r = M.ldlt().solve(gn.transpose() * np);
  d.z = gnp - gn * d.r;
  return d;
}

void polish(const QpProblem& qp, QpResult& res) {
  const auto n = qp.G.rows();
  const auto q = static_cast<Eigen::Index>(res.active.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + q, n + q);
  Eigen::VectorXd rhs(n + q);
  K.topLeftCorner(n, n) = qp.G;
  rhs.head(n) = -qp.a;
  for (Eigen::Index j = 0; j < q; ++j) {
    const auto c = qp.C.col(res.active[static_cast<std::size_t>(j)]);
    K.block(0, n + j, n, 1) = -c;
    K.block(n + j, 0, 1, n) = c.transpose();
    rhs[n + j] = qp.b[res.active[static_cast<std::size_t>(j)]];
  }
  const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
  if (!sol.allFinite()) return;
  Eigen::VectorXd mult = Eigen::VectorXd::Zero(qp.C.cols());
  for (Eigen::Index j = 0; j < q; ++j) mult[res.active[static_cast<std::size_t>(j)]] = sol[n + j];
  const Eigen::VectorXd x = sol.head(n);
  const double polished = kkt_residual(qp, x, mult);
  if (polished < res.kkt_residual) {
    res.x = x;
    res.multipliers = mult;
    res.kkt_residual = polished;
  }
}

}  // namespace

QpResult solve_qp(const QpProblem& qp, const QpOptions& options) {
  const auto n = qp.G.rows();
  const auto m = qp.C.cols();
  if (qp.G.cols() != n || qp.a.size() != n || qp.C.rows() != n || qp.b.size() != m) {
    throw DomainError("QP dimensions are inconsistent");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(qp.G);
  if (llt.info() != Eigen::Success) throw NumericalError("QP Hessian is not positive definite");
  const Eigen::MatrixXd ginv = llt.solve(Eigen::MatrixXd::Identity(n, n));

  Eigen::VectorXd cnorm(m);
  for (Eigen::Index i = 0; i < m; ++i) cnorm[i] = std::max(qp.C.col(i).norm(), 1e-300);

  QpResult res;
  res.x = -(ginv * qp.a);
  std::vector<double> u;  // multipliers of the active set, same order as res.active
  const int max_iter = options.max_iterations > 0
                           ? options.max_iterations
                           : 10 * static_cast<int>(n + m) + 10;
  std::vector<char> is_active(static_cast<std::size_t>(m), 0);

  auto drop = [&](std::size_t k) {
    is_active[static_cast<std::size_t>(res.active[k])] = 0;
    res.active.erase(res.active.begin() + static_cast<std::ptrdiff_t>(k));
    u.erase(u.begin() + static_cast<std::ptrdiff_t>(k));
  };

  res.status = QpStatus::IterationLimit;
  while (res.iterations < max_iter) {
    // Most violated inactive constraint, measured in normalized distance.
    int p = -1;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (is_active[static_cast<std::size_t>(i)]) continue;
      const double s = qp.C.col(i).dot(res.x) - qp.b[i];
      const double tol = options.feasibility_tol * std::max(1.0, std::abs(qp.b[i]));
      if (s < -tol && s / cnorm[i] < worst) {
        worst = s / cnorm[i];
        p = static_cast<int>(i);
      }
    }
    if (p < 0) {
      res.status = QpStatus::Optimal;
      break;
    }
    const Eigen::VectorXd np = qp.C.col(p);
    double up = 0.0;
    bool added = false;
    while (!added && res.iterations < max_iter) {
      ++res.iterations;
      const auto d = directions(ginv, qp.C, res.active, np);
      double t1 = std::numeric_limits<double>::infinity();
      std::size_t k = res.active.size();
      for (std::size_t j = 0; j < res.active.size(); ++j) {
        const double rj = d.r[static_cast<Eigen::Index>(j)];
        if (rj > 1e-12 && u[j] / rj < t1) {
          t1 = u[j] / rj;
          k = j;
        }
      }
      const double znp = d.z.dot(np);
      if (d.z.norm() <= 1e-12 * std::max(1.0, (ginv * np).norm()) || znp <= 0.0) {
        // np depends linearly on the active normals.
        if (k == res.active.size()) {
          res.status = QpStatus::Infeasible;
          res.multipliers = Eigen::VectorXd::Zero(m);
          res.objective = 0.5 * res.x.dot(qp.G * res.x) + qp.a.dot(res.x);
          return res;
        }
        for (std::size_t j = 0; j < u.size(); ++j) u[j] -= t1 * d.r[static_cast<Eigen::Index>(j)];
        up += t1;
        drop(k);
        continue;
      }
      const double t2 = -(np.dot(res.x) - qp.b[p]) / znp;
      const double t = std::min(t1, t2);
      res.x += t * d.z;
      for (std::size_t j = 0; j < u.size(); ++j) u[j] -= t * d.r[static_cast<Eigen::Index>(j)];
      up += t;
      if (t2 <= t1) {
        res.active.push_back(p);
        u.push_back(up);
        is_active[static_cast<std::size_t>(p)] = 1;
        added = true;
      } else {
        drop(k);
      }
    }
  }

  res.multipliers = Eigen::VectorXd::Zero(m);
  for (std::size_t j = 0; j < res.active.size(); ++j) res.multipliers[res.active[j]] = u[j];
  res.kkt_residual = kkt_residual(qp, res.x, res.multipliers);
  if (res.status == QpStatus::Optimal) polish(qp, res);
  res.objective = 0.5 * res.x.dot(qp.G * res.x) + qp.a.dot(res.x);
  return res;
}

}  // namespace tidenav
