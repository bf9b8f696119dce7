#include <cmath>
#include <vector>

#include "doctest.h"

#include "immergrid/spline1d.hpp"

using namespace immergrid;

namespace {

// Dense vector of all n_cells+p basis values at x.
std::vector<double> all_values(const std::vector<double>& t, int p, double x) {
  const int n = int(t.size()) - p - 1;
  std::vector<double> out(n, 0.0);
  std::vector<double> val(p + 1), der(p + 1);
  const int span = spline::find_span(t, p, x);
  spline::eval_nonzero(t, p, x, span, val.data(), der.data());
  for (int i = 0; i <= p; ++i) out[span - p + i] = val[i];
  return out;
}

}  // namespace

TEST_CASE("open uniform knots clamp the interval ends") {
  const auto t = spline::open_uniform_knots(0.0, 1.0, 4, 2);
  const std::vector<double> want{0, 0, 0, 0.25, 0.5, 0.75, 1, 1, 1};
  REQUIRE(t.size() == want.size());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == doctest::Approx(want[i]));

  CHECK(spline::find_span(t, 2, 0.0) == 2);
  CHECK(spline::find_span(t, 2, 0.3) == 3);
  CHECK(spline::find_span(t, 2, 1.0) == 5);  // clamped to the last nonempty span
}

TEST_CASE("B-spline values are a nonnegative partition of unity") {
  for (int p : {1, 2, 3}) {
    const auto t = spline::open_uniform_knots(-1.0, 1.0, 5, p);
    std::vector<double> val(p + 1), der(p + 1);
    for (double x = -1.0; x <= 1.0; x += 0.0625) {
      const int span = spline::find_span(t, p, x);
      spline::eval_nonzero(t, p, x, span, val.data(), der.data());
      double vs = 0.0, ds = 0.0;
      for (int i = 0; i <= p; ++i) {
        CHECK(val[i] >= -1e-14);
        vs += val[i];
        ds += der[i];
      }
      CHECK(vs == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(ds == doctest::Approx(0.0).scale(1.0).epsilon(1e-11));
    }
  }
}

TEST_CASE("Bernstein basis matches the binomial formula") {
  const int p = 3;
  std::vector<double> val(p + 1), der(p + 1);
  for (double u : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    spline::bernstein(p, u, val.data(), der.data());
    const double c[4] = {1, 3, 3, 1};
    double sum = 0.0;
    for (int j = 0; j <= p; ++j) {
      CHECK(val[j] == doctest::Approx(c[j] * std::pow(u, j) * std::pow(1 - u, p - j))
                          .epsilon(1e-13));
      sum += val[j];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("span extraction reproduces B-spline values from Bernstein ones") {
  const int p = 2;
  const auto t = spline::open_uniform_knots(0.0, 1.0, 4, p);
  std::vector<double> bval(p + 1), bder(p + 1), val(p + 1), der(p + 1);
  for (int span = p; span < p + 4; ++span) {
    const MatX C = spline::span_extraction(t, p, span);
    REQUIRE(C.rows() == p + 1);
    REQUIRE(C.cols() == p + 1);
    for (double u : {0.0, 0.31, 0.72, 1.0}) {
      const double x = t[span] + u * (t[span + 1] - t[span]);
      spline::bernstein(p, u, bval.data(), bder.data());
      spline::eval_nonzero(t, p, x, span, val.data(), der.data());
      for (int i = 0; i <= p; ++i) {
        double s = 0.0;
        for (int j = 0; j <= p; ++j) s += C(i, j) * bval[j];
        CHECK(s == doctest::Approx(val[i]).epsilon(1e-13).scale(1.0));
      }
    }
  }
}

TEST_CASE("Lagrange extraction encodes equispaced nodal polynomials") {
  const int p = 2;
  const MatX C = spline::lagrange_extraction(p);
  std::vector<double> bval(p + 1), bder(p + 1);
  // Interpolation property at the nodes u = i/p.
  for (int node = 0; node <= p; ++node) {
    spline::bernstein(p, double(node) / p, bval.data(), bder.data());
    for (int i = 0; i <= p; ++i) {
      double s = 0.0;
      for (int j = 0; j <= p; ++j) s += C(i, j) * bval[j];
      CHECK(s == doctest::Approx(i == node ? 1.0 : 0.0).scale(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("dyadic refinement reproduces coarse splines from fine ones") {
  for (int p : {1, 2, 3}) {
    const int n = 4;
    const MatX T = spline::dyadic_refine_matrix(n, p);
    REQUIRE(T.rows() == n + p);
    REQUIRE(T.cols() == 2 * n + p);

    const auto tc = spline::open_uniform_knots(0.0, 1.0, n, p);
    const auto tf = spline::open_uniform_knots(0.0, 1.0, 2 * n, p);
    for (int k = 0; k <= 100; ++k) {
      const double x = k / 100.0;
      const auto vc = all_values(tc, p, x);
      const auto vf = all_values(tf, p, x);
      for (int i = 0; i < n + p; ++i) {
        double s = 0.0;
        for (int j = 0; j < 2 * n + p; ++j) s += T(i, j) * vf[j];
        CHECK(s == doctest::Approx(vc[i]).scale(1.0).epsilon(1e-13));
      }
    }

    // Each fine function contributes total coefficient 1 (both levels sum to 1).
    for (int j = 0; j < 2 * n + p; ++j)
      CHECK(T.col(j).sum() == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("quadratic interior subdivision weights are (1/4, 3/4, 3/4, 1/4)") {
  const int n = 8, p = 2;
  const MatX T = spline::dyadic_refine_matrix(n, p);
  const int row = n / 2 + 1;  // far from both clamped ends
  std::vector<double> nonzero;
  for (int j = 0; j < T.cols(); ++j)
    if (std::abs(T(row, j)) > 1e-14) nonzero.push_back(T(row, j));
  REQUIRE(nonzero.size() == 4);
  CHECK(nonzero[0] == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(nonzero[1] == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(nonzero[2] == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(nonzero[3] == doctest::Approx(0.25).epsilon(1e-13));
}
