#include "immergrid/multigrid.hpp"

#include <lapacke.h>

#include <algorithm>
#include <utility>

#include "immergrid/mesh.hpp"

namespace immergrid {

MgHierarchy MgHierarchy::build(std::shared_ptr<const FunctionSpace> fine_space,
                               SpMat fine_matrix, int levels,
                               const SmootherConfig& smoother_config) {
  if (!fine_space) throw std::invalid_argument("build: null fine space");
  if (levels < 1) throw std::invalid_argument("build: levels must be >= 1");
  if (fine_matrix.rows() != fine_space->n() ||
      fine_matrix.cols() != fine_space->n())
    throw std::invalid_argument("build: matrix size does not match space");

  // Finest-to-coarsest construction; reversed at the end so that index 0 is
  // the coarsest level. Smoothers hold pointers into the stored matrices, so
  // they are created only after every level sits at its final address.
  std::vector<MgLevel> down;
  down.reserve(levels);
  down.push_back(MgLevel{fine_space, std::move(fine_matrix), SpMat{}, nullptr});
  for (int l = 1; l < levels; ++l) {
    const FunctionSpace& fs = *down.back().space;
    HierarchicalMesh coarse_mesh;
    try {
      coarse_mesh = coarsen(fs.tm->mesh);
    } catch (const OddResolution&) {
      throw ResolutionError("mesh does not support " +
                            std::to_string(levels - 1) + " coarsenings");
    }
    auto coarse_tm = trim(coarse_mesh, fs.tm->ls, fs.tm->classify_depth);
    auto coarse_space = std::make_shared<const FunctionSpace>(
        build_space(coarse_tm, fs.family, fs.degree, fs.components));
    SpMat r = restriction_matrix(fs, *coarse_space);
    SpMat rt = r.transpose();
    SpMat coarse_a = r * (down.back().A * rt);
    down.back().R = std::move(r);
    down.push_back(
        MgLevel{std::move(coarse_space), std::move(coarse_a), SpMat{}, nullptr});
  }

  MgHierarchy h;
  h.levels_.reserve(levels);
  for (auto it = down.rbegin(); it != down.rend(); ++it)
    h.levels_.push_back(std::move(*it));
  for (int l = 1; l < levels; ++l) {
    MgLevel& lv = h.levels_[l];
    lv.smoother = std::make_unique<Smoother>(
        make_smoother(lv.A, *lv.space, smoother_config));
  }

  // Coarsest-level pivoted Cholesky. Pivots below 1e-14 * max diagonal are
  // dropped: for sliver cuts the coarse operator can be numerically singular,
  // and the solve then acts on the regular subspace only.
  const SpMat& a1 = h.levels_.front().A;
  const int n = static_cast<int>(a1.rows());
  h.coarse_chol_ = MatX(a1);
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i)
    max_diag = std::max(max_diag, h.coarse_chol_(i, i));
  h.coarse_piv_.assign(std::max(n, 1), 0);
  lapack_int rank = 0;
  const double tol = 1e-14 * max_diag;
  const lapack_int info =
      LAPACKE_dpstrf(LAPACK_COL_MAJOR, 'L', n, h.coarse_chol_.data(),
                     std::max(n, 1), h.coarse_piv_.data(), &rank, tol);
  if (info < 0) throw std::runtime_error("coarse factorization failed");
  h.rank_ = static_cast<int>(rank);
  return h;
}

VecX MgHierarchy::coarse_solve(const VecX& r) const {
  const int n = static_cast<int>(levels_.front().A.rows());
  VecX permuted(n);
  for (int k = 0; k < n; ++k) permuted[k] = r[coarse_piv_[k] - 1];
  VecX y = VecX::Zero(n);
  const auto l11 = coarse_chol_.topLeftCorner(rank_, rank_);
  y.head(rank_) = l11.triangularView<Eigen::Lower>().solve(permuted.head(rank_));
  l11.triangularView<Eigen::Lower>().transpose().solveInPlace(y.head(rank_));
  VecX x(n);
  for (int k = 0; k < n; ++k) x[coarse_piv_[k] - 1] = y[k];
  return x;
}

VecX MgHierarchy::vcycle_at(int l, const VecX& r) const {
  if (l < 0 || l >= levels())
    throw std::invalid_argument("vcycle_at: level out of range");
  if (l == 0) return coarse_solve(r);
  const MgLevel& lv = levels_[l];
  if (r.size() != lv.A.rows())
    throw std::invalid_argument("vcycle_at: residual size mismatch");

  VecX x = lv.smoother->apply(r, SweepDir::Forward);
  VecX res = r - lv.A * x;

  VecX coarse_x = vcycle_at(l - 1, lv.R * res);
  const VecX correction = lv.R.transpose() * coarse_x;
  x += correction;
  res -= lv.A * correction;

  x += lv.smoother->apply(res, SweepDir::Reverse);
  return x;
}

}  // namespace immergrid
