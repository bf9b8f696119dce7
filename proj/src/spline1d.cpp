#include "immergrid/spline1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace immergrid::spline {

std::vector<double> open_uniform_knots(double x0, double x1, int n_cells, int p) {
  if (n_cells < 1 || p < 1) throw std::invalid_argument("open_uniform_knots: bad sizes");
  std::vector<double> t;
  t.reserve(n_cells + 2 * p + 1);
  for (int i = 0; i < p; ++i) t.push_back(x0);
  for (int i = 0; i <= n_cells; ++i)
    t.push_back(x0 + (x1 - x0) * static_cast<double>(i) / n_cells);
  for (int i = 0; i < p; ++i) t.push_back(x1);
  return t;
}

int find_span(const std::vector<double>& t, int p, double x) {
  const int n = static_cast<int>(t.size()) - p - 1;  // function count
  if (x >= t[n]) return n - 1;                       // clamp right end
  if (x <= t[p]) return p;
  auto it = std::upper_bound(t.begin() + p, t.begin() + n, x);
  return static_cast<int>(it - t.begin()) - 1;
}

void eval_nonzero(const std::vector<double>& t, int p, double x, int span,
                  double* val, double* der) {
  // Cox-de Boor triangle; ndu holds basis values and knot differences.
  std::vector<double> left(p + 1), right(p + 1);
  Eigen::MatrixXd ndu(p + 1, p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - t[span + 1 - j];
    right[j] = t[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }
  for (int i = 0; i <= p; ++i) val[i] = ndu(i, p);
  // First derivatives from the degree-(p-1) column.
  for (int r = 0; r <= p; ++r) {
    double d = 0.0;
    if (r > 0) d += ndu(r - 1, p - 1) / ndu(p, r - 1);
    if (r < p) d -= ndu(r, p - 1) / ndu(p, r);
    der[r] = d * p;
  }
}

void bernstein(int p, double u, double* val, double* der) {
  std::vector<double> lower(p, 0.0);  // degree p-1 values for derivatives
  val[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    if (j == p) std::copy(val, val + p, lower.begin());
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = val[r];
      val[r] = saved + (1.0 - u) * temp;
      saved = u * temp;
    }
    val[j] = saved;
  }
  der[0] = -p * lower[0];
  for (int r = 1; r < p; ++r) der[r] = p * (lower[r - 1] - lower[r]);
  der[p] = p * lower[p - 1];
}

namespace {

// Chebyshev points in (0,1): well conditioned collocation for p <= 4.
std::vector<double> collocation_points(int p) {
  std::vector<double> u(p + 1);
  for (int k = 0; k <= p; ++k)
    u[k] = 0.5 - 0.5 * std::cos(M_PI * (2.0 * k + 1.0) / (2.0 * (p + 1)));
  return u;
}

MatX bernstein_collocation(int p, const std::vector<double>& u) {
  MatX B(p + 1, p + 1);
  std::vector<double> v(p + 1), d(p + 1);
  for (int k = 0; k <= p; ++k) {
    bernstein(p, u[k], v.data(), d.data());
    for (int j = 0; j <= p; ++j) B(k, j) = v[j];
  }
  return B;
}

}  // namespace

MatX span_extraction(const std::vector<double>& t, int p, int span) {
  const auto u = collocation_points(p);
  const double a = t[span], b = t[span + 1];
  MatX Vs(p + 1, p + 1);  // column i = values of local function i
  std::vector<double> v(p + 1), d(p + 1);
  for (int k = 0; k <= p; ++k) {
    eval_nonzero(t, p, a + u[k] * (b - a), span, v.data(), d.data());
    for (int i = 0; i <= p; ++i) Vs(k, i) = v[i];
  }
  const MatX B = bernstein_collocation(p, u);
  // Solve B * C^T = Vs so that f_i(u_k) = sum_j C(i,j) b_j(u_k).
  return B.partialPivLu().solve(Vs).transpose();
}

MatX lagrange_extraction(int p) {
  const auto u = collocation_points(p);
  MatX Vs(p + 1, p + 1);
  for (int k = 0; k <= p; ++k) {
    for (int i = 0; i <= p; ++i) {
      // Nodal polynomial i with equispaced nodes j/p on [0,1].
      double val = 1.0;
      for (int j = 0; j <= p; ++j) {
        if (j == i) continue;
        val *= (u[k] - static_cast<double>(j) / p) /
               (static_cast<double>(i) / p - static_cast<double>(j) / p);
      }
      Vs(k, i) = val;
    }
  }
  const MatX B = bernstein_collocation(p, u);
  return B.partialPivLu().solve(Vs).transpose();
}

MatX dyadic_refine_matrix(int n_cells_coarse, int p) {
  std::vector<double> t = open_uniform_knots(0.0, 1.0, n_cells_coarse, p);
  MatX T = MatX::Identity(n_cells_coarse + p, n_cells_coarse + p);
  for (int s = 0; s < n_cells_coarse; ++s) {
    const double u = (s + 0.5) / n_cells_coarse;
    // Boehm insertion of u: new control points d'_i = a_i d_i + (1-a_i) d_{i-1},
    // hence old basis B_i = a_i B'_i + (1 - a_{i+1}) B'_{i+1}.
    const int n = static_cast<int>(t.size()) - p - 1;
    const int l = find_span(t, p, u);
    std::vector<double> a(n + 1);
    for (int i = 0; i <= n; ++i) {
      if (i <= l - p)
        a[i] = 1.0;
      else if (i <= l)
        a[i] = (u - t[i]) / (t[i + p] - t[i]);
      else
        a[i] = 0.0;
    }
    MatX step = MatX::Zero(n, n + 1);
    for (int i = 0; i < n; ++i) {
      step(i, i) = a[i];
      step(i, i + 1) = 1.0 - a[i + 1];
    }
    T = T * step;
    t.insert(std::upper_bound(t.begin(), t.end(), u), u);
  }
  return T;
}

}  // namespace immergrid::spline
