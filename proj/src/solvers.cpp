#include "immergrid/solvers.hpp"

#include <chrono>
#include <cmath>

namespace immergrid {

namespace {

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

std::pair<VecX, ConvergenceReport> pcg(const SpMat& a, const VecX& b,
                                       const Preconditioner& precond,
                                       double tol, int maxit) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw std::invalid_argument("pcg: dimension mismatch");
  const auto start = std::chrono::steady_clock::now();
  ConvergenceReport report;
  VecX x = VecX::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    report.residuals.push_back(0.0);
    report.converged = true;
    report.seconds = elapsed(start);
    return {x, report};
  }

  VecX r = b;
  report.residuals.push_back(1.0);
  if (1.0 <= tol) {
    report.converged = true;
    report.seconds = elapsed(start);
    return {x, report};
  }

  VecX z = precond(r);
  VecX p = z;
  double rz = r.dot(z);
  for (int k = 0; k < maxit; ++k) {
    const VecX ap = a * p;
    const double pap = p.dot(ap);
    if (pap <= 0.0) {
      report.seconds = elapsed(start);
      throw Breakdown("pcg: p^T A p <= 0 (operator not SPD)", report);
    }
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    report.iterations = k + 1;
    const double rel = r.norm() / bnorm;
    report.residuals.push_back(rel);
    if (rel <= tol) {
      report.converged = true;
      report.seconds = elapsed(start);
      return {x, report};
    }
    z = precond(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  report.seconds = elapsed(start);
  throw NotConverged("pcg: no convergence within " + std::to_string(maxit) +
                         " iterations",
                     report, std::move(x));
}

std::pair<VecX, ConvergenceReport> richardson(const SpMat& a, const VecX& b,
                                              const Preconditioner& precond,
                                              double tol, int maxit) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw std::invalid_argument("richardson: dimension mismatch");
  const auto start = std::chrono::steady_clock::now();
  ConvergenceReport report;
  VecX x = VecX::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    report.residuals.push_back(0.0);
    report.converged = true;
    report.seconds = elapsed(start);
    return {x, report};
  }

  VecX r = b;
  int growth_streak = 0;
  for (int k = 0; k <= maxit; ++k) {
    const double rel = r.norm() / bnorm;
    report.residuals.push_back(rel);
    if (k > 0 && rel > report.residuals[k - 1])
      ++growth_streak;
    else
      growth_streak = 0;
    if (rel <= tol) {
      report.iterations = k;
      report.converged = true;
      report.seconds = elapsed(start);
      return {x, report};
    }
    if (growth_streak >= 10) {
      report.iterations = k;
      report.seconds = elapsed(start);
      throw Diverged("richardson: residual grew for 10 consecutive steps",
                     report);
    }
    if (k == maxit) break;
    const VecX dx = precond(r);
    x += dx;
    r -= a * dx;
  }
  report.iterations = maxit;
  report.seconds = elapsed(start);
  throw NotConverged("richardson: no convergence within " +
                         std::to_string(maxit) + " iterations",
                     report, std::move(x));
}

}  // namespace immergrid
