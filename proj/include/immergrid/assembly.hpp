#pragma once

#include <functional>
#include <optional>

#include "immergrid/basis.hpp"
#include "immergrid/quadrature.hpp"

namespace immergrid {

struct SingularSetup : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Pde { Poisson, LinearElasticity };

enum class BcKind { Dirichlet, Neumann, NormalDirichletTangentialNeumann };

// Vector-valued field; scalar problems read component 0.
using Field2 = std::function<Vec2(const Vec2&)>;

// A boundary condition on the part of the physical boundary selected by the
// optional box and/or level-set filters (point applies if inside box AND
// where(x) >= 0). Pieces are tried in order; first match wins; boundary not
// matching any piece is traction-free (natural condition).
struct BoundaryPiece {
  BcKind kind = BcKind::Dirichlet;
  std::optional<Box> box;
  std::optional<LevelSet> where;
  Field2 value;  // g^D for (normal-)Dirichlet, traction g^N for Neumann
};

struct ProblemDef {
  Pde pde = Pde::Poisson;
  double lambda = 1.0;  // first Lame parameter (elasticity only)
  double mu = 1.0;      // second Lame parameter / shear modulus
  Field2 body_force;    // null = zero
  std::vector<BoundaryPiece> pieces;
  // Dirichlet penalty factors; 0 selects the default 2/h at the finest level.
  double beta_lambda = 0.0;
  double beta_mu = 0.0;
};

struct SparseOperator {
  SpMat A;  // symmetric, CSR
  VecX b;
};

double default_penalty(const TrimmedMesh& tm);

// Assembles volume + penalty-Dirichlet + Neumann terms over all Inside/Cut
// elements. Throws SingularSetup when no Dirichlet-type piece exists.
SparseOperator assemble(const FunctionSpace& space, const ProblemDef& prob,
                        const QuadratureConfig& qcfg);

}  // namespace immergrid
