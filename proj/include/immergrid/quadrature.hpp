#pragma once

#include "immergrid/mesh.hpp"

namespace immergrid {

// Point set with positive weights. Volume rules leave normals empty; boundary
// rules carry unit normals pointing out of the physical domain (toward psi<0,
// or out of the embedding box for side rules).
struct QuadRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  std::vector<Vec2> normals;

  std::size_t size() const { return points.size(); }
  double total_weight() const;
  void append(const QuadRule& other);
};

struct QuadratureConfig {
  int depth = 3;         // recursive bisection depth for cut cells
  int gauss_order = 3;   // points per axis on uncut cells / per segment
  int classify_depth = 2;
  double edge_tol = 1e-12;
};

// 1D Gauss-Legendre nodes/weights on [-1,1].
void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights);

// Integration over cell ∩ {psi >= 0}. Inside cells get a tensor Gauss rule
// (exact for total degree <= 2q-1); Cut cells are recursively bisected to
// `depth` and their leaf sub-cells triangulated against the interface.
QuadRule volume_rule(const LevelSet& ls, const Box& cell, ElemTag tag,
                     const QuadratureConfig& cfg);

// Integration over the interface {psi = 0} within a cut cell, with unit
// normals pointing toward psi < 0. Segments come from the same leaf
// triangulation volume_rule uses, so the two rules see identical geometry.
// Throws std::invalid_argument unless tag == Cut.
QuadRule boundary_rule(const LevelSet& ls, const Box& cell, ElemTag tag,
                       const QuadratureConfig& cfg);

// Integration over one cell side (0=bottom,1=right,2=top,3=left) restricted to
// {psi >= 0}, with the side's outward normal. Used for domain boundary that
// lies on the embedding-box boundary, and for divergence checks.
QuadRule side_rule(const LevelSet& ls, const Box& cell, int side, const QuadratureConfig& cfg);

// Smallest relative element volume |K ∩ domain| / |K| over Inside/Cut
// elements; Inside elements contribute exactly 1.
double min_volume_fraction(const TrimmedMesh& tm, const QuadratureConfig& cfg);

}  // namespace immergrid
