#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "immergrid/assembly.hpp"
#include "immergrid/smoothers.hpp"

namespace immergrid {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest decimal string that parses back to exactly the same double. Used
// for every number the tool emits (config echo, CSV, JSON) so reruns are
// byte-identical and values round-trip losslessly.
std::string format_double(double v);

// Level-set expression language. Primitives take numeric arguments:
//   constant(v)                      v everywhere
//   halfplane(a, b, c)               a*x + b*y + c
//   disc(cx, cy, r)                  r - |p - c|
//   star(cx, cy, r0, amp, k)         r0 + amp*sin(k*theta) - |p - c|
//   box(x0, y0, x1, y1)              inside the axis-aligned rectangle
// Combinators:
//   union(e1, e2, ...)               max
//   intersect(e1, e2, ...)           min
//   complement(e)                    negation
//   affine(a11, a12, a21, a22, b1, b2, e)   e evaluated at A*p + b
LevelSet parse_levelset(const std::string& expression);

struct MeshConfig {
  Vec2 origin{-1.0, -1.0};
  Vec2 extent{2.0, 2.0};
  std::array<int, 2> resolution{16, 16};
  std::vector<Box> refine;  // one refine-by-box pass per entry, applied in order
};

struct BasisConfig {
  Family family = Family::Lagrange;
  int degree = 2;
  int components = 1;
};

// Constant-valued boundary condition on the part of the physical boundary
// selected by the optional box / level-set filters.
struct BoundaryPieceConfig {
  BcKind kind = BcKind::Dirichlet;
  std::optional<Box> box;
  std::optional<std::string> where;  // level-set expression
  std::vector<double> value;         // size components; empty = zero
};

struct ProblemConfig {
  Pde pde = Pde::Poisson;
  double lambda = 1.0;
  double mu = 1.0;
  std::vector<double> body_force;  // constant; size components; empty = zero
  std::vector<BoundaryPieceConfig> boundary{BoundaryPieceConfig{}};
  double beta_lambda = 0.0;  // 0 = automatic 2/h at the finest level
  double beta_mu = 0.0;
};

struct MgConfig {
  int levels = 2;
};

struct SolverConfig {
  std::string type = "pcg";  // pcg | richardson
  double tol = 1e-10;
  int maxit = 1000;
};

struct CaseConfig {
  std::string geometry = "star(0, 0, 0.5, 0.1, 5)";
  MeshConfig mesh;
  QuadratureConfig quadrature;
  BasisConfig basis;
  ProblemConfig problem;
  SmootherConfig smoother;
  MgConfig mg;
  SolverConfig solver;
  std::uint64_t seed = 1;
};

// Parses a TOML-style key tree: [table] / [[array-of-table]] headers, dotted
// keys, strings, numbers, booleans, (nested) arrays, '#' comments. Omitted
// keys keep the defaults above; unknown keys are rejected with their dotted
// path. The result is validated before being returned.
CaseConfig parse_case_config(const std::string& toml_text);
CaseConfig load_case_config(const std::string& path);

// Full configuration with every default explicit; parses back to an
// equivalent CaseConfig.
std::string print_config(const CaseConfig& cfg);

// Cross-field consistency (pde vs components, positive sizes/tolerances,
// parseable expressions, ...). Throws ConfigError; used by parse and again
// after command-line overrides.
void validate(const CaseConfig& cfg);

}  // namespace immergrid
