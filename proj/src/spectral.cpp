#include "immergrid/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>
#include <vector>

#if defined(__SIZEOF_FLOAT128__)
#include <quadmath.h>
#endif

namespace immergrid {

int worker_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("IMMERGRID_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return hw;
}

SpectrumResult dense_spectrum(const LinOp& op, int n, bool want_vectors,
                              int dense_limit) {
  if (n < 1) throw std::invalid_argument("dense_spectrum: n must be positive");
  if (n > dense_limit)
    throw TooLarge("dense_spectrum: n = " + std::to_string(n) +
                   " exceeds dense limit " + std::to_string(dense_limit));

  MatX m(n, n);
  const int nthreads = std::min(worker_threads(), n);
  std::vector<std::thread> workers;
  workers.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    workers.emplace_back([&, t] {
      VecX unit = VecX::Zero(n);
      for (int j = t; j < n; j += nthreads) {
        unit[j] = 1.0;
        m.col(j) = op(unit);
        unit[j] = 0.0;
      }
    });
  }
  for (auto& w : workers) w.join();

  VecX wr(n), wi(n);
  MatX vr;
  if (want_vectors) vr.resize(n, n);
  const lapack_int info = LAPACKE_dgeev(
      LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, m.data(), n,
      wr.data(), wi.data(), nullptr, 1, want_vectors ? vr.data() : nullptr,
      want_vectors ? n : 1);
  if (info != 0) throw std::runtime_error("dense_spectrum: dgeev failed");

  const double scale = wr.cwiseAbs().maxCoeff();
  const double imag_tol = 1e-8 * std::max(scale, 1e-300);
  if (wi.cwiseAbs().maxCoeff() > imag_tol)
    throw std::runtime_error(
        "dense_spectrum: eigenvalues have imaginary parts beyond tolerance "
        "(operator not similar to a symmetric one)");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return wr[a] < wr[b]; });

  SpectrumResult res;
  res.eigenvalues.resize(n);
  for (int i = 0; i < n; ++i) res.eigenvalues[i] = wr[order[i]];
  if (want_vectors) {
    res.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) res.vectors.col(i) = vr.col(order[i]);
  }
  res.lambda_min = res.eigenvalues.front();
  res.lambda_max = res.eigenvalues.back();
  // Dropped coarse pivots can leave exact null modes; kappa is taken over the
  // part of the spectrum above a relative cutoff.
  const double cutoff = 1e-12 * std::abs(res.lambda_max);
  double smallest_nonzero = res.lambda_max;
  for (double ev : res.eigenvalues) {
    if (ev > cutoff) {
      smallest_nonzero = ev;
      break;
    }
  }
  res.kappa = res.lambda_max / smallest_nonzero;
  return res;
}

std::pair<double, VecX> extreme_eigenpair(const LinOp& op, int n, Extreme which,
                                          int iters) {
  if (n < 1) throw std::invalid_argument("extreme_eigenpair: n must be positive");
  Rng rng(0x5eed5eedULL);
  VecX v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  v.normalize();

  double shift = 0.0;
  if (which == Extreme::Smallest) {
    VecX w = v;
    double est = 0.0;
    for (int k = 0; k < 30; ++k) {
      VecX aw = op(w);
      est = w.dot(aw);
      const double norm = aw.norm();
      if (norm == 0.0) break;
      w = aw / norm;
    }
    shift = 1.1 * est;
  }

  const auto apply = [&](const VecX& u) -> VecX {
    if (which == Extreme::Largest) return op(u);
    return shift * u - op(u);
  };

  std::vector<double> rayleigh;
  rayleigh.reserve(iters);
  double lambda = 0.0;
  for (int k = 0; k < iters; ++k) {
    VecX w = apply(v);
    lambda = v.dot(w);
    rayleigh.push_back(which == Extreme::Largest ? lambda : shift - lambda);
    const double norm = w.norm();
    if (norm == 0.0) break;
    v = w / norm;
  }

  const double final_val = rayleigh.back();
  const int window = std::min<int>(10, static_cast<int>(rayleigh.size()) - 1);
  double drift = 0.0;
  for (int k = 0; k < window; ++k) {
    const double prev = rayleigh[rayleigh.size() - 2 - k];
    drift = std::max(drift, std::abs(prev - final_val));
  }
  if (drift > 1e-6 * std::max(std::abs(final_val), 1e-300))
    throw NoConvergence(
        "extreme_eigenpair: Rayleigh quotient still drifting after " +
        std::to_string(iters) + " iterations");
  return {final_val, v};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope: need matching lists, size >= 2");
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log10(x[i]);
    const double ly = std::log10(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// --------------------------------------------------------------------------
// Extended-precision corner-cut conditioning probe.
// --------------------------------------------------------------------------

namespace {

#if defined(__SIZEOF_FLOAT128__)
using Real = __float128;
inline Real r_abs(Real x) { return x < 0 ? -x : x; }
inline Real r_sqrt(Real x) { return sqrtq(x); }
constexpr double kRealEps = 2e-33;
#else
using Real = long double;
inline Real r_abs(Real x) { return x < 0 ? -x : x; }
inline Real r_sqrt(Real x) { return sqrtl(x); }
constexpr double kRealEps = 2e-18;
#endif

// Gauss-Legendre rule on (-1, 1), nodes by Newton on the recurrence.
void gauss_rule(int q, std::vector<Real>& xs, std::vector<Real>& ws) {
  xs.resize(q);
  ws.resize(q);
  for (int k = 0; k < q; ++k) {
    Real x = static_cast<Real>(
        std::cos(M_PI * (k + 0.75) / (q + 0.5)));
    Real dp = 0;
    for (int it = 0; it < 200; ++it) {
      Real p0 = 1, p1 = x;
      for (int j = 2; j <= q; ++j) {
        const Real p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1);
      const Real step = p1 / dp;
      x -= step;
      if (r_abs(step) < static_cast<Real>(kRealEps)) break;
    }
    xs[k] = x;
    ws[k] = 2 / ((1 - x * x) * dp * dp);
  }
}

Real bspl(const std::vector<Real>& t, int j, int p, Real x) {
  if (p == 0) {
    if (t[j] <= x && x < t[j + 1]) return 1;
    if (x == t.back() && t[j + 1] == t.back() && t[j] < t[j + 1]) return 1;
    return 0;
  }
  Real v = 0;
  const Real d1 = t[j + p] - t[j];
  if (d1 > 0) v += (x - t[j]) / d1 * bspl(t, j, p - 1, x);
  const Real d2 = t[j + p + 1] - t[j + 1];
  if (d2 > 0) v += (t[j + p + 1] - x) / d2 * bspl(t, j + 1, p - 1, x);
  return v;
}

Real dbspl(const std::vector<Real>& t, int j, int p, Real x) {
  Real v = 0;
  const Real d1 = t[j + p] - t[j];
  if (d1 > 0) v += p / d1 * bspl(t, j, p - 1, x);
  const Real d2 = t[j + p + 1] - t[j + 1];
  if (d2 > 0) v -= p / d2 * bspl(t, j + 1, p - 1, x);
  return v;
}

// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.
std::vector<Real> sym_eigenvalues(std::vector<Real> a, int n) {
  Real fro = 0;
  for (int i = 0; i < n * n; ++i) fro += a[i] * a[i];
  const Real tol = static_cast<Real>(kRealEps) * r_sqrt(fro);
  for (int sweep = 0; sweep < 100; ++sweep) {
    Real off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
    if (r_sqrt(off) <= tol) break;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const Real apq = a[i * n + j];
        if (apq == 0) continue;
        const Real tau = (a[j * n + j] - a[i * n + i]) / (2 * apq);
        const Real tt = (tau >= 0 ? 1 : Real(-1)) /
                        (r_abs(tau) + r_sqrt(1 + tau * tau));
        const Real c = 1 / r_sqrt(1 + tt * tt);
        const Real s = tt * c;
        for (int k = 0; k < n; ++k) {  // A <- A G
          const Real aki = a[k * n + i], akj = a[k * n + j];
          a[k * n + i] = c * aki - s * akj;
          a[k * n + j] = s * aki + c * akj;
        }
        for (int k = 0; k < n; ++k) {  // A <- G^T A
          const Real aik = a[i * n + k], ajk = a[j * n + k];
          a[i * n + k] = c * aik - s * ajk;
          a[j * n + k] = s * aik + c * ajk;
        }
      }
    }
  }
  std::vector<Real> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a[i * n + i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace

CutProbe corner_cut_probe(double eta, int degree, int spans) {
  if (!(eta > 0.0) || !(eta < 1.0))
    throw std::invalid_argument("corner_cut_probe: eta must be in (0, 1)");
  if (degree < 1 || spans < 2)
    throw std::invalid_argument("corner_cut_probe: degree >= 1, spans >= 2");
  const int p = degree;
  const int n1 = spans + p;
  const Real delta = r_sqrt(static_cast<Real>(eta));
  const Real cut = static_cast<Real>(spans - 1) + delta;

  std::vector<Real> knots;
  for (int i = 0; i < p; ++i) knots.push_back(0);
  for (int i = 0; i <= spans; ++i) knots.push_back(static_cast<Real>(i));
  for (int i = 0; i < p; ++i) knots.push_back(static_cast<Real>(spans));

  std::vector<Real> gx, gw;
  gauss_rule(p + 2, gx, gw);

  // 1D stiffness/mass over (0, cut) plus boundary value products at 0 and cut;
  // x- and y-directions are identical for the square corner domain.
  std::vector<Real> stiff(n1 * n1, 0), mass(n1 * n1, 0), bdry(n1 * n1, 0);
  for (int e = 0; e < spans; ++e) {
    const Real a = static_cast<Real>(e);
    const Real b = std::min(static_cast<Real>(e + 1), cut);
    if (b <= a) break;
    const Real half = (b - a) / 2, mid = (a + b) / 2;
    for (size_t g = 0; g < gx.size(); ++g) {
      const Real x = mid + half * gx[g];
      const Real w = half * gw[g];
      for (int j = e; j <= e + p; ++j) {
        const Real vj = bspl(knots, j, p, x), dj = dbspl(knots, j, p, x);
        for (int k = e; k <= e + p; ++k) {
          const Real vk = bspl(knots, k, p, x), dk = dbspl(knots, k, p, x);
          stiff[j * n1 + k] += w * dj * dk;
          mass[j * n1 + k] += w * vj * vk;
        }
      }
    }
  }
  for (int j = 0; j < n1; ++j) {
    for (int k = 0; k < n1; ++k) {
      bdry[j * n1 + k] = bspl(knots, j, p, Real(0)) * bspl(knots, k, p, Real(0)) +
                         bspl(knots, j, p, cut) * bspl(knots, k, p, cut);
    }
  }

  const Real beta = 2;  // penalty 2/h with unit spans
  const int n = n1 * n1;
  std::vector<Real> a2(static_cast<size_t>(n) * n, 0);
  for (int jx = 0; jx < n1; ++jx) {
    for (int kx = 0; kx < n1; ++kx) {
      const Real sx = stiff[jx * n1 + kx], mx = mass[jx * n1 + kx],
                 bx = bdry[jx * n1 + kx];
      if (sx == 0 && mx == 0 && bx == 0) continue;
      for (int jy = 0; jy < n1; ++jy) {
        for (int ky = 0; ky < n1; ++ky) {
          const Real sy = stiff[jy * n1 + ky], my = mass[jy * n1 + ky],
                     by = bdry[jy * n1 + ky];
          a2[static_cast<size_t>(jx * n1 + jy) * n + (kx * n1 + ky)] +=
              sx * my + mx * sy + beta * (bx * my + mx * by);
        }
      }
    }
  }

  CutProbe out;
  {
    const std::vector<Real> ev = sym_eigenvalues(a2, n);
    out.lambda_min = static_cast<double>(ev.front());
    out.lambda_max = static_cast<double>(ev.back());
    out.kappa = static_cast<double>(ev.back() / ev.front());
  }
  {
    std::vector<Real> scaled(a2);
    std::vector<Real> inv_sqrt_diag(n);
    for (int i = 0; i < n; ++i)
      inv_sqrt_diag[i] = 1 / r_sqrt(a2[static_cast<size_t>(i) * n + i]);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        scaled[static_cast<size_t>(i) * n + j] *=
            inv_sqrt_diag[i] * inv_sqrt_diag[j];
    const std::vector<Real> ev = sym_eigenvalues(std::move(scaled), n);
    out.lambda_min_jacobi = static_cast<double>(ev.front());
    out.lambda_max_jacobi = static_cast<double>(ev.back());
    out.kappa_jacobi = static_cast<double>(ev.back() / ev.front());
  }
  return out;
}

}  // namespace immergrid
