#include "immergrid/quadrature.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace immergrid {

double QuadRule::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void QuadRule::append(const QuadRule& other) {
  points.insert(points.end(), other.points.begin(), other.points.end());
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
  normals.insert(normals.end(), other.normals.begin(), other.normals.end());
}

void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights) {
  if (q < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  nodes.assign(q, 0.0);
  weights.assign(q, 0.0);
  const int half = (q + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-like initial guess, then Newton on P_q.
    double z = std::cos(M_PI * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p = 1.0, pm1 = 0.0;
      for (int j = 0; j < q; ++j) {
        double pm2 = pm1;
        pm1 = p;
        p = ((2.0 * j + 1.0) * z * pm1 - j * pm2) / (j + 1.0);
      }
      dp = q * (z * p - pm1) / (z * z - 1.0);
      double step = p / dp;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    nodes[i] = -z;
    nodes[q - 1 - i] = z;
    weights[i] = weights[q - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

namespace {

void tensor_rule(const Box& cell, int q, QuadRule& out) {
  std::vector<double> n, w;
  gauss_legendre(q, n, w);
  const Vec2 c = cell.center();
  const Vec2 h = 0.5 * cell.size();
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < q; ++i) {
      out.points.emplace_back(c.x() + h.x() * n[i], c.y() + h.y() * n[j]);
      out.weights.push_back(w[i] * w[j] * h.x() * h.y());
    }
}

// Symmetric rules in barycentric form, weights summing to 1.
struct BaryPoint {
  double b0, b1, b2, w;
};

void symmetric_orbit(double a, double w, std::vector<BaryPoint>& pts) {
  const double b = 1.0 - 2.0 * a;
  pts.push_back({a, a, b, w});
  pts.push_back({a, b, a, w});
  pts.push_back({b, a, a, w});
}

// Rule on triangle (v0,v1,v2) exact for total degree 2q-1.
void triangle_rule(const Vec2& v0, const Vec2& v1, const Vec2& v2, int q, QuadRule& out) {
  const Vec2 e1 = v1 - v0, e2 = v2 - v0;
  const double area = 0.5 * std::abs(e1.x() * e2.y() - e1.y() * e2.x());
  if (!(area > 0.0)) return;

  if (q <= 3) {
    std::vector<BaryPoint> pts;
    if (q == 1) {
      pts.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0});
    } else if (q == 2) {
      // Degree 4 (covers the required degree 3).
      symmetric_orbit(0.445948490915965, 0.223381589678011, pts);
      symmetric_orbit(0.091576213509771, 0.109951743655322, pts);
    } else {
      // Degree 5.
      pts.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225});
      symmetric_orbit(0.470142064105115, 0.132394152788506, pts);
      symmetric_orbit(0.101286507323456, 0.125939180544827, pts);
    }
    for (const auto& p : pts) {
      out.points.push_back(p.b0 * v0 + p.b1 * v1 + p.b2 * v2);
      out.weights.push_back(p.w * area);
    }
    return;
  }

  // Collapsed tensor rule: square -> triangle via (u,v) -> v0 + u((1-v)e1 + v e2),
  // Jacobian 2*area*u. Exact for degree 2q-1 with q+1 x q points.
  std::vector<double> nu, wu, nv, wv;
  gauss_legendre(q + 1, nu, wu);
  gauss_legendre(q, nv, wv);
  for (int j = 0; j < q; ++j) {
    const double v = 0.5 * (nv[j] + 1.0), dv = 0.5 * wv[j];
    for (int i = 0; i <= q; ++i) {
      const double u = 0.5 * (nu[i] + 1.0), du = 0.5 * wu[i];
      out.points.push_back(v0 + u * ((1.0 - v) * e1 + v * e2));
      out.weights.push_back(2.0 * area * u * du * dv);
    }
  }
}

// Inside-region polygon of a leaf cell: vertices in CCW order, flagged by
// whether they are interface crossings. At most two polygons (saddle case).
struct LeafPoly {
  std::vector<Vec2> verts;
  std::vector<bool> crossing;
};

int leaf_polygons(const LevelSet& ls, const Box& cell, double edge_tol, LeafPoly out[2]) {
  Vec2 c[4];
  double f[4];
  bool in[4];
  int n_in = 0;
  for (int k = 0; k < 4; ++k) {
    c[k] = cell.corner(k);
    f[k] = ls(c[k]);
    in[k] = f[k] >= 0.0;
    n_in += in[k];
  }
  if (n_in == 0) return 0;
  if (n_in == 4) {
    out[0].verts.assign(c, c + 4);
    out[0].crossing.assign(4, false);
    return 1;
  }

  const bool saddle = in[0] == in[2] && in[1] == in[3] && in[0] != in[1];
  if (saddle && ls(cell.center()) < 0.0) {
    // Two disjoint corner triangles; the center belongs to the outside.
    int np = 0;
    for (int k = 0; k < 4; ++k) {
      if (!in[k]) continue;
      const Vec2 xin = intersect_edge(ls, c[k], c[(k + 3) % 4], edge_tol);
      const Vec2 xout = intersect_edge(ls, c[k], c[(k + 1) % 4], edge_tol);
      out[np].verts = {xin, c[k], xout};
      out[np].crossing = {true, false, true};
      ++np;
    }
    return np;
  }

  // Walk the cell boundary CCW; inside corners and edge crossings in order
  // form a simple CCW polygon (the saddle-with-center-inside hexagon too).
  LeafPoly& p = out[0];
  for (int k = 0; k < 4; ++k) {
    const int k1 = (k + 1) % 4;
    if (in[k]) {
      p.verts.push_back(c[k]);
      p.crossing.push_back(false);
    }
    if (in[k] != in[k1]) {
      p.verts.push_back(intersect_edge(ls, c[k], c[k1], edge_tol));
      p.crossing.push_back(true);
    }
  }
  return 1;
}

Vec2 polygon_centroid(const std::vector<Vec2>& v) {
  Vec2 s = Vec2::Zero();
  for (const auto& p : v) s += p;
  return s / static_cast<double>(v.size());
}

// Splits every interface chord in two at the interface point nearest the
// chord midpoint (root of psi along the chord normal). The boundary stays a
// straight-segment polyline, but halving the chord length quarters the
// polygon's area defect against the curved interface.
void refine_chords(const LevelSet& ls, const Box& leaf, double edge_tol, LeafPoly& p) {
  const std::size_t n = p.verts.size();
  if (n < 3) return;
  LeafPoly out;
  for (std::size_t i = 0; i < n; ++i) {
    out.verts.push_back(p.verts[i]);
    out.crossing.push_back(p.crossing[i]);
    const std::size_t j = (i + 1) % n;
    if (!p.crossing[i] || !p.crossing[j]) continue;
    const Vec2 a = p.verts[i], b = p.verts[j];
    const Vec2 d = b - a;
    const double len = d.norm();
    if (!(len > 0.0)) continue;
    const Vec2 nrm(d.y() / len, -d.x() / len);
    const Vec2 m = 0.5 * (a + b);
    const double fm = ls(m);
    bool found = false;
    Vec2 refined;
    if (fm == 0.0) {
      refined = m;
      found = true;
    } else {
      // Bracket the root along the normal by geometric probing on both sides;
      // the sagitta is O(len^2 * curvature), far below the len/4 cap.
      for (double t = len / 64.0; t <= 0.25 * len && !found; t *= 2.0) {
        for (const double s : {t, -t}) {
          const Vec2 q = m + s * nrm;
          if (!leaf.contains(q) || fm * ls(q) > 0.0) continue;
          refined = intersect_edge(ls, m, q, edge_tol);
          found = true;
          break;
        }
      }
    }
    if (found) {
      out.verts.push_back(refined);
      out.crossing.push_back(true);
    }
  }
  p = std::move(out);
}

void fan_triangulate(const LeafPoly& poly, int q, QuadRule& out) {
  const auto& v = poly.verts;
  if (v.size() < 3) return;
  const Vec2 ctr = polygon_centroid(v);
  for (std::size_t i = 0; i < v.size(); ++i)
    triangle_rule(ctr, v[i], v[(i + 1) % v.size()], q, out);
}

// Interface chords are the cyclically adjacent crossing-crossing vertex pairs;
// normals point away from the polygon interior (toward psi < 0).
void interface_segments(const LeafPoly& poly, int q, const std::vector<double>& gn,
                        const std::vector<double>& gw, QuadRule& out) {
  const auto& v = poly.verts;
  const Vec2 ctr = polygon_centroid(v);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t j = (i + 1) % v.size();
    if (!poly.crossing[i] || !poly.crossing[j]) continue;
    const Vec2 d = v[j] - v[i];
    const double len = d.norm();
    if (!(len > 0.0)) continue;
    Vec2 n(d.y() / len, -d.x() / len);
    const Vec2 mid = 0.5 * (v[i] + v[j]);
    if (n.dot(mid - ctr) < 0.0) n = -n;
    for (int g = 0; g < q; ++g) {
      const double t = 0.5 * (gn[g] + 1.0);
      out.points.push_back(v[i] + t * d);
      out.weights.push_back(0.5 * gw[g] * len);
      out.normals.push_back(n);
    }
  }
}

template <typename LeafFn>
void recurse_cut(const LevelSet& ls, const Box& cell, int depth, int classify_depth,
                 QuadRule* volume_out, int gauss_order, LeafFn&& on_leaf) {
  switch (classify_cell(ls, cell, classify_depth)) {
    case CellClass::Outside:
      return;
    case CellClass::Inside:
      if (volume_out) tensor_rule(cell, gauss_order, *volume_out);
      return;
    case CellClass::Cut:
      break;
  }
  if (depth == 0) {
    on_leaf(cell);
    return;
  }
  const Vec2 m = cell.center();
  const Box kids[4] = {{cell.lo, m},
                       {{m.x(), cell.lo.y()}, {cell.hi.x(), m.y()}},
                       {m, cell.hi},
                       {{cell.lo.x(), m.y()}, {m.x(), cell.hi.y()}}};
  for (const Box& k : kids)
    recurse_cut(ls, k, depth - 1, classify_depth, volume_out, gauss_order, on_leaf);
}

}  // namespace

QuadRule volume_rule(const LevelSet& ls, const Box& cell, ElemTag tag,
                     const QuadratureConfig& cfg) {
  QuadRule out;
  if (tag == ElemTag::Outside) return out;
  if (tag == ElemTag::Inside) {
    tensor_rule(cell, cfg.gauss_order, out);
    return out;
  }
  recurse_cut(ls, cell, cfg.depth, cfg.classify_depth, &out, cfg.gauss_order,
              [&](const Box& leaf) {
                LeafPoly polys[2];
                const int np = leaf_polygons(ls, leaf, cfg.edge_tol, polys);
                for (int i = 0; i < np; ++i) {
                  refine_chords(ls, leaf, cfg.edge_tol, polys[i]);
                  fan_triangulate(polys[i], cfg.gauss_order, out);
                }
              });
  return out;
}

QuadRule boundary_rule(const LevelSet& ls, const Box& cell, ElemTag tag,
                       const QuadratureConfig& cfg) {
  if (tag != ElemTag::Cut)
    throw std::invalid_argument("boundary_rule: element is not cut");
  std::vector<double> gn, gw;
  gauss_legendre(cfg.gauss_order, gn, gw);
  QuadRule out;
  recurse_cut(ls, cell, cfg.depth, cfg.classify_depth, nullptr, cfg.gauss_order,
              [&](const Box& leaf) {
                LeafPoly polys[2];
                const int np = leaf_polygons(ls, leaf, cfg.edge_tol, polys);
                for (int i = 0; i < np; ++i) {
                  refine_chords(ls, leaf, cfg.edge_tol, polys[i]);
                  interface_segments(polys[i], cfg.gauss_order, gn, gw, out);
                }
              });
  return out;
}

QuadRule side_rule(const LevelSet& ls, const Box& cell, int side, const QuadratureConfig& cfg) {
  if (side < 0 || side > 3) throw std::invalid_argument("side_rule: side must be in 0..3");
  const Vec2 a = cell.corner(side);
  const Vec2 b = cell.corner((side + 1) % 4);
  static const Vec2 outward[4] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
  const Vec2 n = outward[side];

  std::vector<double> gn, gw;
  gauss_legendre(cfg.gauss_order, gn, gw);
  QuadRule out;
  const int nseg = 1 << cfg.depth;
  auto add_segment = [&](const Vec2& p0, const Vec2& p1) {
    const Vec2 d = p1 - p0;
    const double len = d.norm();
    if (!(len > 0.0)) return;
    for (int g = 0; g < cfg.gauss_order; ++g) {
      const double t = 0.5 * (gn[g] + 1.0);
      out.points.push_back(p0 + t * d);
      out.weights.push_back(0.5 * gw[g] * len);
      out.normals.push_back(n);
    }
  };
  for (int s = 0; s < nseg; ++s) {
    const double t0 = static_cast<double>(s) / nseg;
    const double t1 = static_cast<double>(s + 1) / nseg;
    const Vec2 p0 = a + t0 * (b - a);
    const Vec2 p1 = a + t1 * (b - a);
    const double f0 = ls(p0), f1 = ls(p1);
    const bool in0 = f0 >= 0.0, in1 = f1 >= 0.0;
    if (in0 && in1) {
      add_segment(p0, p1);
    } else if (in0 != in1) {
      const Vec2 x = intersect_edge(ls, p0, p1, cfg.edge_tol);
      if (in0)
        add_segment(p0, x);
      else
        add_segment(x, p1);
    }
  }
  return out;
}

double min_volume_fraction(const TrimmedMesh& tm, const QuadratureConfig& cfg) {
  double eta = 1.0;
  for (const auto& e : tm.elems) {
    if (e.tag != ElemTag::Cut) continue;
    const double frac = volume_rule(tm.ls, e.box, e.tag, cfg).total_weight() / e.box.area();
    eta = std::min(eta, frac);
  }
  return eta;
}

}  // namespace immergrid
