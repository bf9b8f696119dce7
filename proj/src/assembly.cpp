#include "immergrid/assembly.hpp"

#include <algorithm>

namespace immergrid {

double default_penalty(const TrimmedMesh& tm) {
  const Vec2 h = tm.mesh.grid().cell_size(tm.mesh.max_level());
  return 2.0 / std::min(h.x(), h.y());
}

namespace {

const BoundaryPiece* match_piece(const std::vector<BoundaryPiece>& pieces, const Vec2& x) {
  for (const auto& p : pieces) {
    if (p.box && !p.box->contains(x)) continue;
    if (p.where && (*p.where)(x) < 0.0) continue;
    return &p;
  }
  return nullptr;
}

// Sides of an element lying on the embedding-box boundary; only there can the
// physical boundary coincide with element faces.
void box_boundary_sides(const HierarchicalMesh& mesh, const ElementId& e, int out[4], int& n) {
  n = 0;
  const int cx = mesh.grid().cells_x(e.level), cy = mesh.grid().cells_y(e.level);
  if (e.iy == 0) out[n++] = 0;
  if (e.ix == cx - 1) out[n++] = 1;
  if (e.iy == cy - 1) out[n++] = 2;
  if (e.ix == 0) out[n++] = 3;
}

}  // namespace

SparseOperator assemble(const FunctionSpace& space, const ProblemDef& prob,
                        const QuadratureConfig& qcfg) {
  const TrimmedMesh& tm = *space.tm;
  const int c = space.components;
  if (prob.pde == Pde::Poisson && c != 1)
    throw std::invalid_argument("assemble: Poisson requires a scalar space");
  if (prob.pde == Pde::LinearElasticity && c != 2)
    throw std::invalid_argument("assemble: elasticity requires a 2-component space");
  if (prob.pde == Pde::LinearElasticity && !(prob.lambda > 0.0 && prob.mu > 0.0))
    throw std::invalid_argument("assemble: Lame parameters must be positive");
  const bool any_dirichlet =
      std::any_of(prob.pieces.begin(), prob.pieces.end(), [](const BoundaryPiece& p) {
        return p.kind != BcKind::Neumann;
      });
  if (!any_dirichlet)
    throw SingularSetup("assemble: no Dirichlet piece; operator would be singular");

  const double bl = prob.beta_lambda > 0.0 ? prob.beta_lambda : default_penalty(tm);
  const double bm = prob.beta_mu > 0.0 ? prob.beta_mu : default_penalty(tm);
  const double lam = prob.lambda, mu = prob.mu;

  const int n = space.n();
  VecX b = VecX::Zero(n);
  std::vector<Eigen::Triplet<double>> trips;

  for (const auto& te : tm.elems) {
    const auto& eb = space.element_basis(te.id);
    const int na = static_cast<int>(eb.anchors.size());
    const int nd = na * c;
    MatX Ke = MatX::Zero(nd, nd);
    VecX Fe = VecX::Zero(nd);
    const Vec2 lo = te.box.lo, sz = te.box.size();

    auto basis_at = [&](const Vec2& x) {
      return evaluate_basis(space, te.id,
                            Vec2((x.x() - lo.x()) / sz.x(), (x.y() - lo.y()) / sz.y()));
    };

    // --- volume ---------------------------------------------------------
    const QuadRule vr = volume_rule(tm.ls, te.box, te.tag, qcfg);
    for (std::size_t q = 0; q < vr.size(); ++q) {
      const double w = vr.weights[q];
      const BasisEval be = basis_at(vr.points[q]);
      if (prob.pde == Pde::Poisson) {
        Ke.noalias() += w * (be.gradients * be.gradients.transpose());
        if (prob.body_force) Fe += w * prob.body_force(vr.points[q]).x() * be.values;
      } else {
        const Vec2 f = prob.body_force ? prob.body_force(vr.points[q]) : Vec2::Zero();
        for (int i = 0; i < na; ++i) {
          const Vec2 gi = be.gradients.row(i);
          for (int j = 0; j < na; ++j) {
            const Vec2 gj = be.gradients.row(j);
            const double gdot = gi.dot(gj);
            for (int a = 0; a < 2; ++a)
              for (int bb = 0; bb < 2; ++bb)
                Ke(i * 2 + a, j * 2 + bb) +=
                    w * (lam * gi[a] * gj[bb] + mu * gi[bb] * gj[a] +
                         (a == bb ? mu * gdot : 0.0));
          }
          for (int a = 0; a < 2; ++a) Fe[i * 2 + a] += w * f[a] * be.values[i];
        }
      }
    }

    // --- physical boundary ------------------------------------------------
    auto boundary_point = [&](const Vec2& x, double w, const Vec2& nrm) {
      const BoundaryPiece* piece = match_piece(prob.pieces, x);
      if (!piece) return;
      const Vec2 g = piece->value ? piece->value(x) : Vec2::Zero();
      const BasisEval be = basis_at(x);
      if (prob.pde == Pde::Poisson) {
        if (piece->kind == BcKind::Neumann) {
          Fe += w * g.x() * be.values;
        } else {
          Ke.noalias() += (w * bm) * (be.values * be.values.transpose());
          Fe += (w * bm * g.x()) * be.values;
        }
        return;
      }
      switch (piece->kind) {
        case BcKind::Neumann:
          for (int i = 0; i < na; ++i)
            for (int a = 0; a < 2; ++a) Fe[i * 2 + a] += w * g[a] * be.values[i];
          break;
        case BcKind::Dirichlet:
          for (int i = 0; i < na; ++i)
            for (int j = 0; j < na; ++j) {
              const double vij = be.values[i] * be.values[j];
              for (int a = 0; a < 2; ++a)
                for (int bb = 0; bb < 2; ++bb)
                  Ke(i * 2 + a, j * 2 + bb) +=
                      w * vij *
                      (lam * bl * nrm[a] * nrm[bb] + (a == bb ? 2.0 * mu * bm : 0.0));
            }
          for (int i = 0; i < na; ++i)
            for (int a = 0; a < 2; ++a)
              Fe[i * 2 + a] +=
                  w * be.values[i] * (lam * bl * g.dot(nrm) * nrm[a] + 2.0 * mu * bm * g[a]);
          break;
        case BcKind::NormalDirichletTangentialNeumann: {
          const double coef = lam * bl + 2.0 * mu * bm;
          for (int i = 0; i < na; ++i)
            for (int j = 0; j < na; ++j)
              for (int a = 0; a < 2; ++a)
                for (int bb = 0; bb < 2; ++bb)
                  Ke(i * 2 + a, j * 2 + bb) +=
                      w * coef * nrm[a] * nrm[bb] * be.values[i] * be.values[j];
          for (int i = 0; i < na; ++i)
            for (int a = 0; a < 2; ++a)
              Fe[i * 2 + a] += w * coef * g.dot(nrm) * nrm[a] * be.values[i];
          break;
        }
      }
    };

    if (te.tag == ElemTag::Cut) {
      const QuadRule br = boundary_rule(tm.ls, te.box, te.tag, qcfg);
      for (std::size_t q = 0; q < br.size(); ++q)
        boundary_point(br.points[q], br.weights[q], br.normals[q]);
    }
    int sides[4], nsides;
    box_boundary_sides(tm.mesh, te.id, sides, nsides);
    for (int si = 0; si < nsides; ++si) {
      const QuadRule sr = side_rule(tm.ls, te.box, sides[si], qcfg);
      for (std::size_t q = 0; q < sr.size(); ++q)
        boundary_point(sr.points[q], sr.weights[q], sr.normals[q]);
    }

    // --- scatter ----------------------------------------------------------
    for (int i = 0; i < na; ++i)
      for (int a = 0; a < c; ++a) {
        const int gi = space.dof_of(eb.anchors[i], a);
        b[gi] += Fe[i * c + a];
        for (int j = 0; j < na; ++j)
          for (int bb = 0; bb < c; ++bb) {
            const double v = Ke(i * c + a, j * c + bb);
            if (v != 0.0) trips.emplace_back(gi, space.dof_of(eb.anchors[j], bb), v);
          }
      }
  }

  SpMat A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  SpMat At = SpMat(A.transpose());
  A = 0.5 * (A + At);  // remove accumulation-order round-off asymmetry

  return {std::move(A), std::move(b)};
}

}  // namespace immergrid
