#include "immergrid/basis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "immergrid/spline1d.hpp"

namespace immergrid {

namespace detail {

struct SpaceData {
  // Per hierarchy level (0..M). Lagrange leaves knots empty.
  std::vector<std::vector<double>> knots_x, knots_y;
  std::vector<int> fn_nx, fn_ny;  // function-grid sizes per level
  // THB only: per level, x-fastest mask of active tensor functions.
  std::vector<std::vector<std::uint8_t>> active_fn;
  // Untrimmed anchors (all tensor functions, or all THB-active functions),
  // their dense per-level ordinal lookup, and kept index (-1 if trimmed away).
  std::vector<ScalarAnchor> all_anchors;
  std::vector<std::vector<int>> ordinal;  // per level: ay*fn_nx+ax -> ordinal or -1
  std::vector<int> kept;
  // THB only: finest-level tensor coefficients per untrimmed anchor.
  struct Chain {
    int fi0 = 0, fj0 = 0;
    MatX C;
  };
  std::vector<Chain> chains;
};

}  // namespace detail

namespace {

using detail::SpaceData;

enum class CellState : std::uint8_t { Active, FineCovered, CoarseCovered };

std::vector<std::vector<CellState>> cell_states(const HierarchicalMesh& mesh) {
  const int M = mesh.max_level();
  std::vector<std::vector<CellState>> st(M + 1);
  for (int l = 0; l <= M; ++l) {
    const int cx = mesh.grid().cells_x(l), cy = mesh.grid().cells_y(l);
    st[l].assign(static_cast<std::size_t>(cx) * cy, CellState::FineCovered);
    for (int iy = 0; iy < cy; ++iy)
      for (int ix = 0; ix < cx; ++ix) {
        CellState s = CellState::FineCovered;
        if (mesh.is_active({l, ix, iy})) {
          s = CellState::Active;
        } else {
          for (int k = 1; k <= l; ++k)
            if (mesh.is_active({l - k, ix >> k, iy >> k})) {
              s = CellState::CoarseCovered;
              break;
            }
        }
        st[l][static_cast<std::size_t>(iy) * cx + ix] = s;
      }
  }
  return st;
}

// 1D span range of function a on a grid with `cells` cells.
void fn_spans(int a, int p, int cells, int& lo, int& hi) {
  lo = std::max(a - p, 0);
  hi = std::min(a, cells - 1);
}

// Lagrange: 1D elements containing node a.
void node_elems(int a, int p, int cells, int& lo, int& hi) {
  lo = std::max(0, (a - 1) / p);
  if (a == 0) lo = 0;
  hi = std::min(cells - 1, a / p);
}

// Flatten a (p+1)x(p+1) Bernstein coefficient matrix (jx,jy) into an
// extraction row ordered x-fastest.
void append_row(FunctionSpace::ElementBasis& eb, int anchor, const MatX& coeffs) {
  const int nc = static_cast<int>(coeffs.size());
  eb.anchors.push_back(anchor);
  eb.extraction.conservativeResize(eb.extraction.rows() + 1, nc);
  eb.extraction.row(eb.extraction.rows() - 1) =
      Eigen::Map<const VecX>(coeffs.data(), nc).transpose();
}

}  // namespace

FunctionSpace build_space(std::shared_ptr<const TrimmedMesh> tm, Family family,
                          int degree, int components) {
  if (!tm) throw std::invalid_argument("build_space: null mesh");
  if (degree < 1 || degree > 4)
    throw std::invalid_argument("build_space: degree must be in 1..4");
  if (components < 1 || components > 3)
    throw std::invalid_argument("build_space: components must be in 1..3");
  const HierarchicalMesh& mesh = tm->mesh;
  const int M = mesh.max_level();
  if (family != Family::THB && M > 0)
    throw UnsupportedFamilyOnHierarchy(
        "Lagrange/Bspline spaces require an unrefined mesh; use THB");

  FunctionSpace s;
  s.family = family;
  s.degree = degree;
  s.components = components;
  s.tm = std::move(tm);
  auto data = std::make_shared<detail::SpaceData>();
  SpaceData& d = *data;
  const EmbeddingGrid& g = mesh.grid();
  const int p = degree;

  d.knots_x.resize(M + 1);
  d.knots_y.resize(M + 1);
  d.fn_nx.resize(M + 1);
  d.fn_ny.resize(M + 1);
  for (int l = 0; l <= M; ++l) {
    const int cx = g.cells_x(l), cy = g.cells_y(l);
    if (family == Family::Lagrange) {
      d.fn_nx[l] = p * cx + 1;
      d.fn_ny[l] = p * cy + 1;
    } else {
      d.fn_nx[l] = cx + p;
      d.fn_ny[l] = cy + p;
      d.knots_x[l] = spline::open_uniform_knots(g.origin.x(), g.origin.x() + g.extent.x(), cx, p);
      d.knots_y[l] = spline::open_uniform_knots(g.origin.y(), g.origin.y() + g.extent.y(), cy, p);
    }
  }

  // --- untrimmed anchor enumeration -------------------------------------
  d.ordinal.resize(M + 1);
  if (family == Family::THB) {
    const auto st = cell_states(mesh);
    d.active_fn.resize(M + 1);
    for (int l = 0; l <= M; ++l) {
      const int cx = g.cells_x(l), cy = g.cells_y(l);
      const int nfx = d.fn_nx[l], nfy = d.fn_ny[l];
      d.active_fn[l].assign(static_cast<std::size_t>(nfx) * nfy, 0);
      d.ordinal[l].assign(static_cast<std::size_t>(nfx) * nfy, -1);
      for (int ay = 0; ay < nfy; ++ay)
        for (int ax = 0; ax < nfx; ++ax) {
          int xlo, xhi, ylo, yhi;
          fn_spans(ax, p, cx, xlo, xhi);
          fn_spans(ay, p, cy, ylo, yhi);
          bool any_active = false, any_coarse = false;
          for (int sy = ylo; sy <= yhi && !any_coarse; ++sy)
            for (int sx = xlo; sx <= xhi; ++sx) {
              const CellState cs = st[l][static_cast<std::size_t>(sy) * cx + sx];
              if (cs == CellState::Active) any_active = true;
              if (cs == CellState::CoarseCovered) {
                any_coarse = true;
                break;
              }
            }
          if (any_active && !any_coarse) {
            d.active_fn[l][static_cast<std::size_t>(ay) * nfx + ax] = 1;
            d.ordinal[l][static_cast<std::size_t>(ay) * nfx + ax] =
                static_cast<int>(d.all_anchors.size());
            d.all_anchors.push_back({l, ax, ay});
          }
        }
    }
  } else {
    const int nfx = d.fn_nx[0], nfy = d.fn_ny[0];
    d.ordinal[0].resize(static_cast<std::size_t>(nfx) * nfy);
    for (int ay = 0; ay < nfy; ++ay)
      for (int ax = 0; ax < nfx; ++ax) {
        d.ordinal[0][static_cast<std::size_t>(ay) * nfx + ax] =
            static_cast<int>(d.all_anchors.size());
        d.all_anchors.push_back({0, ax, ay});
      }
  }

  // --- per-element extraction rows ---------------------------------------
  // Per-level, per-axis caches of local-function -> Bernstein maps.
  std::vector<std::vector<MatX>> Ex(M + 1), Ey(M + 1);
  MatX lag;
  if (family == Family::Lagrange) {
    lag = spline::lagrange_extraction(p);
  } else {
    for (int l = 0; l <= M; ++l) {
      const int cx = g.cells_x(l), cy = g.cells_y(l);
      Ex[l].resize(cx);
      Ey[l].resize(cy);
      for (int c = 0; c < cx; ++c) Ex[l][c] = spline::span_extraction(d.knots_x[l], p, c + p);
      for (int c = 0; c < cy; ++c) Ey[l][c] = spline::span_extraction(d.knots_y[l], p, c + p);
    }
  }

  std::map<ElementId, FunctionSpace::ElementBasis> ebasis;
  auto tag_of = [&](const ElementId& e) -> const ElemTag* {
    auto it = s.tm->tags.find(e);
    return it == s.tm->tags.end() ? nullptr : &it->second;
  };

  if (family != Family::THB) {
    for (const auto& te : s.tm->elems) {
      const int ex = te.id.ix, ey = te.id.iy;
      FunctionSpace::ElementBasis eb;
      const int nloc = (p + 1) * (p + 1);
      eb.anchors.reserve(nloc);
      eb.extraction.resize(nloc, nloc);
      const MatX& Rx = family == Family::Lagrange ? lag : Ex[0][ex];
      const MatX& Ry = family == Family::Lagrange ? lag : Ey[0][ey];
      int r = 0;
      for (int jb = 0; jb <= p; ++jb)
        for (int ia = 0; ia <= p; ++ia, ++r) {
          const int ax = family == Family::Lagrange ? p * ex + ia : ex + ia;
          const int ay = family == Family::Lagrange ? p * ey + jb : ey + jb;
          eb.anchors.push_back(d.ordinal[0][static_cast<std::size_t>(ay) * d.fn_nx[0] + ax]);
          for (int jy = 0; jy <= p; ++jy)
            for (int jx = 0; jx <= p; ++jx)
              eb.extraction(r, jy * (p + 1) + jx) = Rx(ia, jx) * Ry(jb, jy);
        }
      ebasis.emplace(te.id, std::move(eb));
    }
  } else {
    // Two-scale matrices between consecutive levels plus their column ranges.
    std::vector<MatX> Tx(M), Ty(M);
    std::vector<std::vector<std::pair<int, int>>> colrange_x(M), colrange_y(M);
    auto col_ranges = [](const MatX& T) {
      std::vector<std::pair<int, int>> r(T.rows());
      for (int i = 0; i < T.rows(); ++i) {
        int lo = -1, hi = -1;
        for (int j = 0; j < T.cols(); ++j)
          if (T(i, j) != 0.0) {
            if (lo < 0) lo = j;
            hi = j;
          }
        r[i] = {lo, hi};
      }
      return r;
    };
    for (int m = 0; m < M; ++m) {
      Tx[m] = spline::dyadic_refine_matrix(g.cells_x(m), p);
      Ty[m] = spline::dyadic_refine_matrix(g.cells_y(m), p);
      colrange_x[m] = col_ranges(Tx[m]);
      colrange_y[m] = col_ranges(Ty[m]);
    }

    d.chains.resize(d.all_anchors.size());
    for (int f = 0; f < static_cast<int>(d.all_anchors.size()); ++f) {
      const ScalarAnchor a = d.all_anchors[f];
      int i0 = a.ax, i1 = a.ax, j0 = a.ay, j1 = a.ay;
      MatX C = MatX::Ones(1, 1);
      for (int m = a.level; m <= M; ++m) {
        const int cx = g.cells_x(m), cy = g.cells_y(m);
        // Rows on Inside/Cut level-m elements where coefficients are nonzero.
        for (int sx = std::max(i0 - p, 0); sx <= std::min(i1, cx - 1); ++sx)
          for (int sy = std::max(j0 - p, 0); sy <= std::min(j1, cy - 1); ++sy) {
            const ElementId e{m, sx, sy};
            const ElemTag* t = tag_of(e);
            if (!t || *t == ElemTag::Outside) continue;
            MatX Cl = MatX::Zero(p + 1, p + 1);  // local coeffs, x-major rows
            bool any = false;
            for (int ia = 0; ia <= p; ++ia)
              for (int jb = 0; jb <= p; ++jb) {
                const int gx = sx + ia, gy = sy + jb;
                if (gx < i0 || gx > i1 || gy < j0 || gy > j1) continue;
                const double c = C(gx - i0, gy - j0);
                if (c != 0.0) {
                  Cl(ia, jb) = c;
                  any = true;
                }
              }
            if (!any) continue;
            const MatX coeffs = Ex[m][sx].transpose() * Cl * Ey[m][sy];
            append_row(ebasis[e], f, coeffs);
          }
        if (m == M) {
          d.chains[f] = {i0, j0, std::move(C)};
          break;
        }
        // Promote to level m+1, then truncate active fine coefficients.
        int fi0 = colrange_x[m][i0].first, fi1 = colrange_x[m][i1].second;
        int fj0 = colrange_y[m][j0].first, fj1 = colrange_y[m][j1].second;
        C = Tx[m].block(i0, fi0, i1 - i0 + 1, fi1 - fi0 + 1).transpose() * C *
            Ty[m].block(j0, fj0, j1 - j0 + 1, fj1 - fj0 + 1);
        const int nfx = d.fn_nx[m + 1];
        for (int af = 0; af < C.rows(); ++af)
          for (int bf = 0; bf < C.cols(); ++bf)
            if (d.active_fn[m + 1][static_cast<std::size_t>(fj0 + bf) * nfx + (fi0 + af)])
              C(af, bf) = 0.0;
        i0 = fi0;
        i1 = fi1;
        j0 = fj0;
        j1 = fj1;
      }
    }
  }

  // --- trimming: keep anchors with at least one row ----------------------
  const int nall = static_cast<int>(d.all_anchors.size());
  d.kept.assign(nall, -1);
  for (const auto& [e, eb] : ebasis)
    for (int aa : eb.anchors) d.kept[aa] = 0;
  std::vector<ScalarAnchor> kept_anchors;
  int next = 0;
  for (int aa = 0; aa < nall; ++aa)
    if (d.kept[aa] == 0) {
      d.kept[aa] = next++;
      kept_anchors.push_back(d.all_anchors[aa]);
    }
  for (auto& [e, eb] : ebasis)
    for (int& aa : eb.anchors) aa = d.kept[aa];
  std::vector<std::vector<ElementId>> support(next);
  for (const auto& [e, eb] : ebasis)
    for (int aa : eb.anchors) support[aa].push_back(e);

  s.anchors_ = std::move(kept_anchors);
  s.ebasis_ = std::move(ebasis);
  s.support_ = std::move(support);
  s.data_ = std::move(data);
  return s;
}

BasisEval evaluate_basis(const FunctionSpace& s, const ElementId& e, const Vec2& ref) {
  const auto& eb = s.element_basis(e);
  const int p = s.degree;
  std::vector<double> bu(p + 1), du(p + 1), bv(p + 1), dv(p + 1);
  spline::bernstein(p, ref.x(), bu.data(), du.data());
  spline::bernstein(p, ref.y(), bv.data(), dv.data());
  const int nloc = (p + 1) * (p + 1);
  VecX val(nloc), gx(nloc), gy(nloc);
  for (int jy = 0; jy <= p; ++jy)
    for (int jx = 0; jx <= p; ++jx) {
      const int k = jy * (p + 1) + jx;
      val[k] = bu[jx] * bv[jy];
      gx[k] = du[jx] * bv[jy];
      gy[k] = bu[jx] * dv[jy];
    }
  const Box b = s.tm->mesh.element_box(e);
  BasisEval out;
  out.anchors = &eb.anchors;
  out.values = eb.extraction * val;
  out.gradients.resize(eb.extraction.rows(), 2);
  out.gradients.col(0) = eb.extraction * gx / b.size().x();
  out.gradients.col(1) = eb.extraction * gy / b.size().y();
  return out;
}

namespace {

// 1D value of coarse Lagrange nodal function `a` at fine node `f` (fine grid
// has twice the cells). Exact for the piecewise-polynomial nodal basis.
double lagrange_coarse_at_fine_node(int p, int a, int coarse_cells, int f) {
  const double sraw = static_cast<double>(f) / (2 * p);
  const int ex = std::min(coarse_cells - 1, static_cast<int>(sraw + 1e-9));
  const int iloc = a - p * ex;
  if (iloc < 0 || iloc > p) return 0.0;
  const double u = sraw - ex;
  double v = 1.0;
  for (int j = 0; j <= p; ++j) {
    if (j == iloc) continue;
    v *= (u - static_cast<double>(j) / p) / (static_cast<double>(iloc - j) / p);
  }
  return v;
}

using Trip = Eigen::Triplet<double>;

void expand_components(const std::vector<Trip>& scalar, int comps, int ncoarse, int nfine,
                       SpMat& out) {
  std::vector<Trip> trips;
  trips.reserve(scalar.size() * comps);
  for (const auto& t : scalar)
    for (int c = 0; c < comps; ++c)
      trips.emplace_back(t.row() * comps + c, t.col() * comps + c, t.value());
  out.resize(ncoarse * comps, nfine * comps);
  out.setFromTriplets(trips.begin(), trips.end());
}

}  // namespace

SpMat restriction_matrix(const FunctionSpace& fine, const FunctionSpace& coarse) {
  if (fine.family != coarse.family || fine.degree != coarse.degree ||
      fine.components != coarse.components)
    throw MeshMismatch("restriction_matrix: space families/degrees differ");
  HierarchicalMesh expected = [&] {
    try {
      return coarsen(fine.tm->mesh);
    } catch (const OddResolution&) {
      throw MeshMismatch("restriction_matrix: fine mesh resolution is not even");
    }
  }();
  if (!(coarse.tm->mesh == expected))
    throw MeshMismatch("restriction_matrix: coarse mesh is not the derefinement of fine");

  const int p = fine.degree;
  const SpaceData& df = fine.data();
  const SpaceData& dc = coarse.data();
  std::vector<Trip> trips;

  if (fine.family == Family::Lagrange) {
    const int ccx = coarse.tm->mesh.grid().cells_x(0);
    const int ccy = coarse.tm->mesh.grid().cells_y(0);
    const int fnx = df.fn_nx[0];
    for (int ca = 0; ca < coarse.num_anchors(); ++ca) {
      const ScalarAnchor& A = coarse.anchors()[ca];
      int exlo, exhi, eylo, eyhi;
      node_elems(A.ax, p, ccx, exlo, exhi);
      node_elems(A.ay, p, ccy, eylo, eyhi);
      for (int fy = eylo * 2 * p; fy <= (eyhi + 1) * 2 * p; ++fy) {
        const double ly = lagrange_coarse_at_fine_node(p, A.ay, ccy, fy);
        if (ly == 0.0) continue;
        for (int fx = exlo * 2 * p; fx <= (exhi + 1) * 2 * p; ++fx) {
          const double lx = lagrange_coarse_at_fine_node(p, A.ax, ccx, fx);
          if (lx == 0.0) continue;
          const int ford = df.ordinal[0][static_cast<std::size_t>(fy) * fnx + fx];
          const int fk = df.kept[ford];
          if (fk >= 0) trips.emplace_back(ca, fk, lx * ly);
        }
      }
    }
  } else if (fine.family == Family::Bspline) {
    const MatX Tx = spline::dyadic_refine_matrix(coarse.tm->mesh.grid().cells_x(0), p);
    const MatX Ty = spline::dyadic_refine_matrix(coarse.tm->mesh.grid().cells_y(0), p);
    const int fnx = df.fn_nx[0];
    for (int ca = 0; ca < coarse.num_anchors(); ++ca) {
      const ScalarAnchor& A = coarse.anchors()[ca];
      for (int fy = 0; fy < Ty.cols(); ++fy) {
        const double ty = Ty(A.ay, fy);
        if (ty == 0.0) continue;
        for (int fx = 0; fx < Tx.cols(); ++fx) {
          const double tx = Tx(A.ax, fx);
          if (tx == 0.0) continue;
          const int fk = df.kept[df.ordinal[0][static_cast<std::size_t>(fy) * fnx + fx]];
          if (fk >= 0) trips.emplace_back(ca, fk, tx * ty);
        }
      }
    }
  } else {
    // THB: peel the coarse function level by level on the fine hierarchy.
    const HierarchicalMesh& fmesh = fine.tm->mesh;
    const EmbeddingGrid& fg = fmesh.grid();
    const int Mf = fmesh.max_level();
    const int ffx = df.fn_nx[Mf], ffy = df.fn_ny[Mf];
    const auto& fknx = df.knots_x[Mf];
    const auto& fkny = df.knots_y[Mf];

    // Plain dyadic two-scale matrices keyed by coarse cell count.
    std::map<int, MatX> tcache;
    auto twoscale = [&](int cells) -> const MatX& {
      auto it = tcache.find(cells);
      if (it == tcache.end()) it = tcache.emplace(cells, spline::dyadic_refine_matrix(cells, p)).first;
      return it->second;
    };

    // Chebyshev tensor points per element for the local value solves.
    std::vector<double> cheb(p + 1);
    for (int k = 0; k <= p; ++k)
      cheb[k] = 0.5 - 0.5 * std::cos(M_PI * (2.0 * k + 1.0) / (2.0 * (p + 1)));

    VecX r(static_cast<std::size_t>(ffx) * ffy);  // residual on finest tensor grid
    for (int ca = 0; ca < coarse.num_anchors(); ++ca) {
      // Promote the coarse chain (no truncation beyond its own hierarchy)
      // onto the fine hierarchy's finest tensor grid.
      const int cord = [&] {
        const ScalarAnchor& A = coarse.anchors()[ca];
        return dc.ordinal[A.level][static_cast<std::size_t>(A.ay) * dc.fn_nx[A.level] + A.ax];
      }();
      const SpaceData::Chain& ch = dc.chains[cord];
      int i0 = ch.fi0, j0 = ch.fj0;
      MatX C = ch.C;
      int cellsx = coarse.tm->mesh.grid().cells_x(coarse.tm->mesh.max_level());
      int cellsy = coarse.tm->mesh.grid().cells_y(coarse.tm->mesh.max_level());
      while (cellsx < fg.cells_x(Mf)) {
        const MatX& Tx = twoscale(cellsx);
        const MatX& Ty = twoscale(cellsy);
        int fi0 = -1, fi1 = -1, fj0 = -1, fj1 = -1;
        for (int i = 0; i < C.rows(); ++i)
          for (int j = 0; j < Tx.cols(); ++j)
            if (Tx(i0 + i, j) != 0.0) {
              if (fi0 < 0 || j < fi0) fi0 = j;
              fi1 = std::max(fi1, j);
            }
        for (int i = 0; i < C.cols(); ++i)
          for (int j = 0; j < Ty.cols(); ++j)
            if (Ty(j0 + i, j) != 0.0) {
              if (fj0 < 0 || j < fj0) fj0 = j;
              fj1 = std::max(fj1, j);
            }
        C = Tx.block(i0, fi0, C.rows(), fi1 - fi0 + 1).transpose() * C *
            Ty.block(j0, fj0, C.cols(), fj1 - fj0 + 1);
        i0 = fi0;
        j0 = fj0;
        cellsx *= 2;
        cellsy *= 2;
      }

      r.setZero();
      for (int a = 0; a < C.rows(); ++a)
        for (int b = 0; b < C.cols(); ++b)
          r[static_cast<std::size_t>(j0 + b) * ffx + (i0 + a)] = C(a, b);
      const double rmax0 = C.cwiseAbs().maxCoeff();
      // Rectangle (finest cells) outside which the residual vanishes.
      int rx0 = std::max(i0 - p, 0), rx1 = std::min(i0 + static_cast<int>(C.rows()) - 1,
                                                    fg.cells_x(Mf) - 1);
      int ry0 = std::max(j0 - p, 0), ry1 = std::min(j0 + static_cast<int>(C.cols()) - 1,
                                                    fg.cells_y(Mf) - 1);

      std::map<int, double> assigned;  // fine untrimmed ordinal -> coefficient
      for (int l = 0; l <= Mf; ++l) {
        const int shift = Mf - l;
        const int nfx = df.fn_nx[l];
        const auto& knx = df.knots_x[l];
        const auto& kny = df.knots_y[l];
        std::vector<int> lvl_assigned;
        for (const auto& [ix, iy] : fmesh.level_cells(l)) {
          // Skip elements whose finest-cell block misses the residual rect.
          if ((ix << shift) > rx1 || ((ix + 1) << shift) - 1 < rx0) continue;
          if ((iy << shift) > ry1 || ((iy + 1) << shift) - 1 < ry0) continue;
          // Unknowns: active level-l functions alive on this element.
          std::vector<int> unk;
          for (int b = iy; b <= iy + p; ++b)
            for (int a = ix; a <= ix + p; ++a)
              if (df.active_fn[l][static_cast<std::size_t>(b) * nfx + a]) unk.push_back(a + b * nfx);
          if (unk.empty()) continue;
          const Box eb = fmesh.element_box({l, ix, iy});
          const int npts = (p + 1) * (p + 1);
          MatX A(npts, static_cast<int>(unk.size()));
          VecX rhs(npts);
          std::vector<double> vx(p + 1), dxv(p + 1), vy(p + 1), dyv(p + 1);
          for (int ky = 0, row = 0; ky <= p; ++ky)
            for (int kx = 0; kx <= p; ++kx, ++row) {
              const Vec2 pt(eb.lo.x() + cheb[kx] * eb.size().x(),
                            eb.lo.y() + cheb[ky] * eb.size().y());
              // Level-l basis values at pt (span is this element by construction).
              spline::eval_nonzero(knx, p, pt.x(), ix + p, vx.data(), dxv.data());
              spline::eval_nonzero(kny, p, pt.y(), iy + p, vy.data(), dyv.data());
              for (int u = 0; u < static_cast<int>(unk.size()); ++u) {
                const int a = unk[u] % nfx, b = unk[u] / nfx;
                A(row, u) = vx[a - ix] * vy[b - iy];
              }
              // Residual value at pt from the finest tensor representation.
              const int sxf = spline::find_span(fknx, p, pt.x());
              const int syf = spline::find_span(fkny, p, pt.y());
              spline::eval_nonzero(fknx, p, pt.x(), sxf, vx.data(), dxv.data());
              spline::eval_nonzero(fkny, p, pt.y(), syf, vy.data(), dyv.data());
              double val = 0.0;
              for (int jb = 0; jb <= p; ++jb)
                for (int ia = 0; ia <= p; ++ia)
                  val += r[static_cast<std::size_t>(syf - p + jb) * ffx + (sxf - p + ia)] *
                         vx[ia] * vy[jb];
              rhs[row] = val;
            }
          const VecX x = A.colPivHouseholderQr().solve(rhs);
          for (int u = 0; u < static_cast<int>(unk.size()); ++u) {
            const int a = unk[u] % nfx, b = unk[u] / nfx;
            const int ford = df.ordinal[l][static_cast<std::size_t>(b) * nfx + a];
            if (!assigned.count(ford)) {
              assigned.emplace(ford, x[u]);
              lvl_assigned.push_back(ford);
            }
          }
        }
        // Subtract this level's resolved contributions from the residual.
        for (int ford : lvl_assigned) {
          const double xv = assigned[ford];
          if (xv == 0.0) continue;
          const SpaceData::Chain& fc = df.chains[ford];
          for (int a = 0; a < fc.C.rows(); ++a)
            for (int b = 0; b < fc.C.cols(); ++b)
              r[static_cast<std::size_t>(fc.fj0 + b) * ffx + (fc.fi0 + a)] -= xv * fc.C(a, b);
          rx0 = std::min(rx0, std::max(fc.fi0 - p, 0));
          rx1 = std::max(rx1, std::min(fc.fi0 + static_cast<int>(fc.C.rows()) - 1,
                                       fg.cells_x(Mf) - 1));
          ry0 = std::min(ry0, std::max(fc.fj0 - p, 0));
          ry1 = std::max(ry1, std::min(fc.fj0 + static_cast<int>(fc.C.cols()) - 1,
                                       fg.cells_y(Mf) - 1));
        }
      }
      if (r.cwiseAbs().maxCoeff() > 1e-8 * std::max(rmax0, 1e-300))
        throw MeshMismatch("restriction_matrix: coarse function not representable (hierarchy not nested)");
      for (const auto& [ford, xv] : assigned) {
        if (xv == 0.0) continue;
        const int fk = df.kept[ford];
        if (fk >= 0 && std::abs(xv) > 1e-14) trips.emplace_back(ca, fk, xv);
      }
    }
  }

  SpMat R;
  expand_components(trips, fine.components, coarse.num_anchors(), fine.num_anchors(), R);
  return R;
}

}  // namespace immergrid
