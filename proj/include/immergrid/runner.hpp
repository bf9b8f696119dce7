#pragma once

#include "immergrid/config.hpp"
#include "immergrid/multigrid.hpp"

namespace immergrid {

struct RunOptions {
  // quadrature-check | solve | spectrum | sweep | print-config
  std::string subcommand = "solve";
  // Artifact paths are <out_prefix>[_suffix].csv and <out_prefix>.json;
  // parent directories are created on demand.
  std::string out_prefix = "run";

  // spectrum: operator composition and optional eigenvector dump.
  // jacobi = D^-1 A; gs2/as2/ms2 = symmetrized double iteration of that
  // smoother applied to A; vcycle = V-cycle-preconditioned A.
  std::string spectrum_op = "vcycle";
  int mode = -1;     // index (ascending) of the eigenvector to sample, -1 = none
  int samples = 65;  // lattice points per axis for sampled fields

  // sweep: axis in {grid, levels, depth, eta} plus the list of axis values.
  std::string axis;
  std::vector<double> values;
  int jobs = 1;                // concurrent sweep points (capped by IMMERGRID_THREADS)
  bool sweep_spectrum = false; // also record the preconditioned spectrum per point
};

// Mesh -> trim -> space -> operator, the shared front half of every command.
struct BuiltCase {
  std::shared_ptr<const TrimmedMesh> tm;
  std::shared_ptr<const FunctionSpace> space;
  SparseOperator op;
  double assemble_seconds = 0.0;
};

HierarchicalMesh build_mesh(const CaseConfig& cfg);
ProblemDef problem_def(const CaseConfig& cfg);
BuiltCase build_case(const CaseConfig& cfg);

// Finest active Inside/Cut element containing p, if any.
std::optional<ElementId> locate_point(const TrimmedMesh& tm, const Vec2& p);

// Field values of coefficient vector x at p; empty when p is outside the
// physical domain.
VecX sample_field(const FunctionSpace& space, const VecX& x, const Vec2& p);

// Executes one subcommand, writes CSV artifacts plus a JSON run-metadata
// record, and prints a short summary. Exit code: 0 ok, 1 solver failure,
// 2 configuration error.
int run_case(const CaseConfig& cfg, const RunOptions& opt);

}  // namespace immergrid
