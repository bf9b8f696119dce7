#pragma once

#include <Eigen/Cholesky>

#include "immergrid/basis.hpp"

namespace immergrid {

struct EmptyBlockAfterFilter : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SmootherKind { Jacobi, GaussSeidel, AdditiveSchwarz, MultiplicativeSchwarz };
enum class SweepDir { Forward, Reverse };

struct SmootherConfig {
  SmootherKind kind = SmootherKind::MultiplicativeSchwarz;
  double gamma = 0.0;  // 0 = automatic: 1 for GS/multiplicative, 1/max N_K otherwise
  double filter_ratio = 1e-16;
};

struct BlockLayout {
  std::vector<int> owners;               // owner DOF per block, ascending
  std::vector<std::vector<int>> blocks;  // member DOFs per block, ascending
};

// Encapsulating-support blocks: one per DOF (B-spline/THB) or per nodal DOF
// (Lagrange), holding every same-component DOF whose physical support is
// contained in the owner's. DOFs not covered by any block get a singleton.
BlockLayout select_blocks(const FunctionSpace& space);

// One singleton block per DOF (Jacobi and Gauss-Seidel layout).
BlockLayout singleton_blocks(const FunctionSpace& space);

struct ColorClasses {
  std::vector<int> color_of;  // per block
  int num_colors = 0;
};

// Greedy coloring in owner order of the block-adjacency graph; blocks are
// adjacent when the element supports of their members intersect.
ColorClasses color_blocks(const BlockLayout& layout, const FunctionSpace& space);

// max_K N_K: largest number of blocks having a member supported on a single
// Inside/Cut element.
int max_blocks_per_element(const BlockLayout& layout, const FunctionSpace& space);

// Dense Cholesky factors per block after near-singular filtering: while the
// smallest eigenvalue of a block is below filter_ratio times its largest
// diagonal entry, the DOF dominating the offending eigenvector is dropped
// (from this block only). filter_ratio = 0 disables filtering. Mutates the
// member lists in `layout`; throws EmptyBlockAfterFilter if a block empties.
std::vector<Eigen::LLT<MatX>> factorize_blocks(const SpMat& A, BlockLayout& layout,
                                               double filter_ratio);

struct SchwarzPartition {
  BlockLayout layout;  // post-filtering
  ColorClasses colors;
  std::vector<Eigen::LLT<MatX>> factor;
  int max_nk = 0;
};

// Smoother as a preconditioner application y = gamma * M^{-1} r (Forward) or
// gamma * M^{-T} r (Reverse). Multiplicative sweeps process colors in
// descending index order Forward and ascending Reverse, so Reverse is the
// exact adjoint of Forward. The referenced matrix must outlive the smoother.
class Smoother {
 public:
  Smoother(const SpMat& A, SmootherKind kind, SchwarzPartition part, double gamma);

  VecX apply(const VecX& r, SweepDir dir = SweepDir::Forward) const;
  // Symmetric double iteration (M^{-1} + M^{-T} - M^{-T} A M^{-1}) r.
  VecX apply_symmetric(const VecX& r) const;

  SmootherKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  const SchwarzPartition& partition() const { return part_; }

 private:
  const SpMat* A_;
  SmootherKind kind_;
  SchwarzPartition part_;
  double gamma_ = 1.0;
  VecX diag_;
};

Smoother make_smoother(const SpMat& A, const FunctionSpace& space, const SmootherConfig& cfg);

}  // namespace immergrid
