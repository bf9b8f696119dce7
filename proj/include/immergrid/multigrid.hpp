#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "immergrid/basis.hpp"
#include "immergrid/common.hpp"
#include "immergrid/smoothers.hpp"

namespace immergrid {

/// The fine mesh cannot be coarsened the requested number of times.
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One level of the multigrid hierarchy. `R` restricts this level's vectors to
/// the next-coarser level and is empty on the coarsest level; `smoother` is
/// null on the coarsest level, where a direct solve is used instead.
struct MgLevel {
  std::shared_ptr<const FunctionSpace> space;
  SpMat A;
  SpMat R;
  std::unique_ptr<Smoother> smoother;
};

/// Geometric multigrid hierarchy: meshes coarsened by halving the base
/// resolution, spaces rebuilt per level, coarse operators formed by the
/// Galerkin triple product A_c = R A R^T, Schwarz smoothers rebuilt on each
/// level's own space, and a pivoted dense Cholesky factorization on the
/// coarsest level. Immutable after build; `vcycle` calls on distinct
/// right-hand sides may run concurrently.
class MgHierarchy {
 public:
  /// `levels` counts total levels including the finest; levels == 1 means the
  /// V-cycle degenerates to a direct solve of the fine system. Throws
  /// ResolutionError if the mesh does not support levels-1 coarsenings.
  static MgHierarchy build(std::shared_ptr<const FunctionSpace> fine_space,
                           SpMat fine_matrix, int levels,
                           const SmootherConfig& smoother_config = {});

  int levels() const { return static_cast<int>(levels_.size()); }

  /// Level 0 is the coarsest, levels()-1 the finest.
  const MgLevel& level(int l) const { return levels_.at(l); }

  /// One V-cycle starting at 0-based level index l with residual r.
  VecX vcycle_at(int l, const VecX& r) const;

  /// One full V-cycle from the finest level: the preconditioner application.
  VecX apply(const VecX& r) const { return vcycle_at(levels() - 1, r); }

  /// Direct solve with the coarsest operator. Pivots below
  /// 1e-14 * max(diag A_1) are dropped and the solution is taken in the
  /// subspace spanned by the accepted pivots.
  VecX coarse_solve(const VecX& r) const;

  /// Number of pivots accepted by the coarsest factorization.
  int coarse_rank() const { return rank_; }

 private:
  MgHierarchy() = default;

  std::vector<MgLevel> levels_;  // [0] = coarsest
  MatX coarse_chol_;             // lower-triangular pivoted Cholesky factor
  std::vector<int> coarse_piv_;  // 1-based pivot indices
  int rank_ = 0;
};

/// Algorithm-style entry point with one-based level indexing: ell = 1 is the
/// coarsest (direct-solve) level and ell = h.levels() the finest.
inline VecX vcycle(const MgHierarchy& h, int ell, const VecX& r) {
  return h.vcycle_at(ell - 1, r);
}

}  // namespace immergrid
