#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

#include "doctest.h"

#include "immergrid/assembly.hpp"
#include "immergrid/multigrid.hpp"
#include "immergrid/solvers.hpp"

using namespace immergrid;

namespace {

EmbeddingGrid unit_grid(int n) {
  EmbeddingGrid g;
  g.origin = Vec2(-1.0, -1.0);
  g.extent = Vec2(2.0, 2.0);
  g.resolution = {n, n};
  return g;
}

struct Problem {
  std::shared_ptr<const FunctionSpace> space;
  SpMat A;
  VecX b;
};

Problem star_poisson(int n) {
  auto tm = trim(HierarchicalMesh::uniform(unit_grid(n)), LevelSet::star(0.037, 0.011, 0.5, 0.1, 5));
  auto space = std::make_shared<const FunctionSpace>(build_space(tm, Family::Lagrange, 2));
  ProblemDef prob;
  BoundaryPiece p;
  p.value = [](const Vec2&) { return Vec2::Zero(); };
  prob.pieces.push_back(p);
  prob.body_force = [](const Vec2&) { return Vec2(1.0, 0.0); };
  SparseOperator op = assemble(*space, prob, {});
  return {space, std::move(op.A), std::move(op.b)};
}

const Preconditioner identity_precond = [](const VecX& r) { return r; };

}  // namespace

TEST_CASE("cg on the identity converges in one step") {
  const int n = 40;
  SpMat A(n, n);
  for (int i = 0; i < n; ++i) A.insert(i, i) = 1.0;
  A.makeCompressed();
  Rng rng(7);
  VecX b(n);
  for (int i = 0; i < n; ++i) b[i] = rng.uniform(-1.0, 1.0);

  const auto [x, rep] = pcg(A, b, identity_precond);
  CHECK(rep.converged);
  CHECK(rep.iterations == 1);
  REQUIRE(rep.residuals.size() == 2);
  CHECK(rep.residuals[0] == 1.0);
  CHECK(rep.residuals[1] <= 1e-14);
  CHECK((x - b).lpNorm<Eigen::Infinity>() <= 1e-14);

  const auto [xz, repz] = pcg(A, VecX::Zero(n), identity_precond);
  CHECK(repz.converged);
  CHECK(xz.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("multigrid cg matches a direct solve and certifies its residual") {
  const Problem pr = star_poisson(16);
  REQUIRE(pr.space->n() <= 2000);
  const MgHierarchy h = MgHierarchy::build(pr.space, pr.A, 2);

  const double tol = 1e-10;
  const auto [x, rep] =
      pcg(pr.A, pr.b, [&](const VecX& r) { return h.apply(r); }, tol, 1000);
  CHECK(rep.converged);
  CHECK(rep.iterations >= 1);
  CHECK(int(rep.residuals.size()) == rep.iterations + 1);
  CHECK(rep.residuals.front() == 1.0);
  CHECK(rep.seconds > 0.0);

  // Recompute the residual from scratch: the report must not flatter it.
  CHECK((pr.b - pr.A * x).norm() / pr.b.norm() <= 2 * tol);

  Eigen::SimplicialLDLT<SpMat> chol(pr.A);
  REQUIRE(chol.info() == Eigen::Success);
  const VecX xd = chol.solve(pr.b);
  CHECK((x - xd).lpNorm<Eigen::Infinity>() <= 1e-7 * xd.lpNorm<Eigen::Infinity>());
}

TEST_CASE("an exhausted iteration budget carries the partial state") {
  const Problem pr = star_poisson(16);
  const VecX dinv = pr.A.diagonal().cwiseInverse();
  bool thrown = false;
  try {
    pcg(pr.A, pr.b, [&](const VecX& r) { return VecX(dinv.asDiagonal() * r); }, 1e-10, 5);
  } catch (const NotConverged& e) {
    thrown = true;
    CHECK(e.report.iterations == 5);
    CHECK(e.report.residuals.size() == 6);
    CHECK_FALSE(e.report.converged);
    CHECK(e.x.size() == pr.b.size());
    CHECK(e.x.lpNorm<Eigen::Infinity>() > 0.0);  // five steps of progress
  }
  CHECK(thrown);
}

TEST_CASE("richardson with the damped two-level cycle contracts at 1 - lambda_min") {
  const Problem pr = star_poisson(16);
  SmootherConfig sc;
  sc.kind = SmootherKind::AdditiveSchwarz;
  sc.gamma = 0.25;
  const MgHierarchy h = MgHierarchy::build(pr.space, pr.A, 2, sc);

  const auto [x, rep] =
      richardson(pr.A, pr.b, [&](const VecX& r) { return h.apply(r); }, 1e-10, 200);
  CHECK(rep.converged);
  CHECK(rep.iterations >= 25);
  CHECK(rep.iterations <= 60);
  CHECK((pr.b - pr.A * x).norm() / pr.b.norm() <= 2e-10);

  // Asymptotic ratio equals the spectral radius of I - BA; with the damped
  // additive cycle that is 1 - lambda_min, a little under 0.6 here.
  const auto& res = rep.residuals;
  REQUIRE(res.size() >= 6);
  for (std::size_t k = res.size() - 3; k < res.size(); ++k) {
    const double ratio = res[k] / res[k - 1];
    CHECK(ratio > 0.5);
    CHECK(ratio < 0.6);
  }
}

TEST_CASE("richardson reports divergence for an undamped additive cycle") {
  const Problem pr = star_poisson(16);
  SmootherConfig sc;
  sc.kind = SmootherKind::AdditiveSchwarz;
  sc.gamma = 1.0;  // lambda_max near 4: the stationary iteration blows up
  const MgHierarchy h = MgHierarchy::build(pr.space, pr.A, 2, sc);

  bool thrown = false;
  try {
    richardson(pr.A, pr.b, [&](const VecX& r) { return h.apply(r); }, 1e-10, 500);
  } catch (const Diverged& e) {
    thrown = true;
    const auto& res = e.report.residuals;
    REQUIRE(res.size() >= 11);
    CHECK(res.back() > res.front());
  }
  CHECK(thrown);
}

TEST_CASE("cg reports a breakdown on indefinite operators") {
  SpMat A(2, 2);
  A.insert(0, 0) = 1.0;
  A.insert(1, 1) = -1.0;
  A.makeCompressed();
  VecX b(2);
  b << 0.0, 1.0;

  bool thrown = false;
  try {
    pcg(A, b, identity_precond);
  } catch (const Breakdown& e) {
    thrown = true;
    CHECK(!e.report.residuals.empty());
  }
  CHECK(thrown);

  SpMat bad(3, 3);
  bad.makeCompressed();
  CHECK_THROWS_AS(pcg(bad, b, identity_precond), std::invalid_argument);
}
