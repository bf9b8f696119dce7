#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "immergrid/common.hpp"

namespace immergrid {

/// A symmetric positive definite preconditioner application r -> M^{-1} r.
using Preconditioner = std::function<VecX(const VecX&)>;

struct ConvergenceReport {
  /// Relative residual norms ||r_k||_2 / ||b||_2, one entry per iteration
  /// starting at k = 0 (the initial residual with zero initial guess).
  std::vector<double> residuals;
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0;
};

/// p^T A p <= 0 inside CG: the operator or preconditioner is not SPD.
struct Breakdown : std::runtime_error {
  explicit Breakdown(std::string what, ConvergenceReport r)
      : std::runtime_error(std::move(what)), report(std::move(r)) {}
  ConvergenceReport report;
};

/// Iteration budget exhausted before reaching the tolerance.
struct NotConverged : std::runtime_error {
  NotConverged(std::string what, ConvergenceReport r, VecX last)
      : std::runtime_error(std::move(what)),
        report(std::move(r)),
        x(std::move(last)) {}
  ConvergenceReport report;
  VecX x;
};

/// Residual grew for 10 consecutive Richardson steps.
struct Diverged : std::runtime_error {
  Diverged(std::string what, ConvergenceReport r)
      : std::runtime_error(std::move(what)), report(std::move(r)) {}
  ConvergenceReport report;
};

/// Preconditioned conjugate gradients with zero initial guess. Stops when
/// ||r_k||_2 / ||b||_2 <= tol.
std::pair<VecX, ConvergenceReport> pcg(const SpMat& a, const VecX& b,
                                       const Preconditioner& precond,
                                       double tol = 1e-10, int maxit = 1000);

/// Preconditioned Richardson iteration x <- x + M^{-1}(b - A x) with zero
/// initial guess; the stationary form of applying the V-cycle directly.
std::pair<VecX, ConvergenceReport> richardson(const SpMat& a, const VecX& b,
                                              const Preconditioner& precond,
                                              double tol = 1e-10,
                                              int maxit = 1000);

}  // namespace immergrid
