#pragma once

#include <vector>

#include "immergrid/common.hpp"

// One-dimensional polynomial/spline machinery shared by all basis families.
// Everything here works on a single axis; tensorization happens in basis.cpp.
namespace immergrid::spline {

// Open (clamped) uniform knot vector on [x0, x1] with n_cells spans.
std::vector<double> open_uniform_knots(double x0, double x1, int n_cells, int p);

// Index k with t[k] <= x < t[k+1], clamped to the last nonempty span at x1.
int find_span(const std::vector<double>& t, int p, double x);

// Values and first derivatives of the p+1 functions nonzero on `span`
// (global indices span-p .. span). val/der must hold p+1 entries.
void eval_nonzero(const std::vector<double>& t, int p, double x, int span,
                  double* val, double* der);

// Bernstein basis of degree p on [0,1]; val/der must hold p+1 entries.
void bernstein(int p, double u, double* val, double* der);

// Extraction row-maps local functions to Bernstein coefficients on [0,1]:
// f_i(u) = sum_j C(i,j) b_j(u) for u the span/element coordinate.
MatX span_extraction(const std::vector<double>& t, int p, int span);
MatX lagrange_extraction(int p);  // equispaced nodes i/p on [0,1]

// Two-scale matrix T for dyadic refinement of the open uniform basis on a
// unit interval: B_coarse = T * B_fine, size (n_cells+p) x (2*n_cells+p).
// Built by Boehm insertion of every span midpoint.
MatX dyadic_refine_matrix(int n_cells_coarse, int p);

}  // namespace immergrid::spline
