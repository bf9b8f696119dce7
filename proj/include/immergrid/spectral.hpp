#pragma once

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "immergrid/common.hpp"

namespace immergrid {

/// A linear operator application v -> Op v; must be reentrant, as callers
/// evaluate it concurrently on distinct vectors.
using LinOp = std::function<VecX(const VecX&)>;

struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpectrumResult {
  std::vector<double> eigenvalues;  // ascending, imaginary parts checked+dropped
  MatX vectors;       // column j pairs with eigenvalues[j]; empty unless requested
  double lambda_min;  // smallest eigenvalue including any numerically-zero part
  double lambda_max;
  double kappa;  // lambda_max over the smallest eigenvalue of the nonzero part
};

/// Materializes the operator column-by-column (parallel over columns), then
/// computes all eigenvalues with a dense nonsymmetric solver. Operators here
/// are similar to symmetric ones, so imaginary parts must stay below
/// 1e-8 * lambda_max; they are checked and discarded. The nonzero part used
/// for kappa excludes eigenvalues <= 1e-12 * lambda_max (dropped-pivot null
/// modes).
SpectrumResult dense_spectrum(const LinOp& op, int n, bool want_vectors = false,
                              int dense_limit = 6000);

enum class Extreme { Smallest, Largest };

/// Power iteration for the extreme eigenpair of an SPD-similar operator.
/// Smallest runs on the shifted operator sigma*I - Op with sigma = 1.1 times a
/// 30-step power estimate of lambda_max. Throws NoConvergence if the Rayleigh
/// quotient still drifts by more than 1e-6 relative over the last 10
/// iterations.
std::pair<double, VecX> extreme_eigenpair(const LinOp& op, int n, Extreme which,
                                          int iters = 100);

/// Conditioning of the Poisson system on the corner-cut domain
/// (0, s-1+delta)^2 embedded in an s-span-per-axis B-spline patch of unit
/// spans, with penalty parameter 2 on the whole physical boundary and
/// delta = sqrt(eta), so the corner element keeps volume fraction eta. This is
/// the worst-case cut for the eta-conditioning law of SPD immersed systems.
/// Because kappa reaches ~1e20 within the sweep range while a double-precision
/// matrix only carries ~1e-16 componentwise accuracy, the probe assembles the
/// tensor-product system and solves the eigenproblem in extended precision.
struct CutProbe {
  double lambda_min = 0, lambda_max = 0, kappa = 0;  // plain matrix
  double lambda_min_jacobi = 0, lambda_max_jacobi = 0,
         kappa_jacobi = 0;  // symmetrically diagonal-scaled matrix
};
CutProbe corner_cut_probe(double eta, int degree = 2, int spans = 4);

/// Least-squares slope of log10(y) against log10(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// min(hardware threads, IMMERGRID_THREADS when set), at least 1.
int worker_threads();

}  // namespace immergrid
