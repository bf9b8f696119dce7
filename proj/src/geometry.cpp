#include "immergrid/geometry.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace immergrid {
namespace detail {

struct LevelSetNode {
  virtual ~LevelSetNode() = default;
  virtual double eval(const Vec2& p) const = 0;
};

namespace {

struct ConstNode final : LevelSetNode {
  double v;
  explicit ConstNode(double v_) : v(v_) {}
  double eval(const Vec2&) const override { return v; }
};

struct HalfplaneNode final : LevelSetNode {
  double a, b, c;
  HalfplaneNode(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {}
  double eval(const Vec2& p) const override { return a * p.x() + b * p.y() + c; }
};

struct DiscNode final : LevelSetNode {
  Vec2 c;
  double r;
  DiscNode(double cx, double cy, double r_) : c(cx, cy), r(r_) {}
  double eval(const Vec2& p) const override { return r - (p - c).norm(); }
};

struct StarNode final : LevelSetNode {
  Vec2 c;
  double r0, amp;
  int k;
  StarNode(double cx, double cy, double r0_, double amp_, int k_)
      : c(cx, cy), r0(r0_), amp(amp_), k(k_) {}
  double eval(const Vec2& p) const override {
    const double dx = p.x() - c.x(), dy = p.y() - c.y();
    const double r = std::hypot(dx, dy);
    const double theta = (dx == 0.0 && dy == 0.0) ? 0.0 : std::atan2(dy, dx);
    return r0 + amp * std::sin(k * theta) - r;
  }
};

struct BoxNode final : LevelSetNode {
  double x0, y0, x1, y1;
  BoxNode(double x0_, double y0_, double x1_, double y1_) : x0(x0_), y0(y0_), x1(x1_), y1(y1_) {}
  double eval(const Vec2& p) const override {
    return std::min(std::min(p.x() - x0, x1 - p.x()), std::min(p.y() - y0, y1 - p.y()));
  }
};

struct CustomNode final : LevelSetNode {
  std::function<double(const Vec2&)> f;
  explicit CustomNode(std::function<double(const Vec2&)> f_) : f(std::move(f_)) {}
  double eval(const Vec2& p) const override { return f(p); }
};

struct AffineNode final : LevelSetNode {
  std::shared_ptr<const LevelSetNode> sub;
  Eigen::Matrix2d A;
  Vec2 b;
  double eval(const Vec2& p) const override { return sub->eval(A * p + b); }
};

enum class Comb { Min, Max, Neg };

struct CombineNode final : LevelSetNode {
  Comb op;
  std::shared_ptr<const LevelSetNode> a, b;
  double eval(const Vec2& p) const override {
    switch (op) {
      case Comb::Min: return std::min(a->eval(p), b->eval(p));
      case Comb::Max: return std::max(a->eval(p), b->eval(p));
      default: return -a->eval(p);
    }
  }
};

}  // namespace
}  // namespace detail

using detail::LevelSetNode;

LevelSet::LevelSet() : node_(std::make_shared<detail::ConstNode>(1.0)) {}

LevelSet LevelSet::constant(double v) {
  return LevelSet(std::make_shared<detail::ConstNode>(v));
}
LevelSet LevelSet::halfplane(double a, double b, double c) {
  return LevelSet(std::make_shared<detail::HalfplaneNode>(a, b, c));
}
LevelSet LevelSet::disc(double cx, double cy, double r) {
  return LevelSet(std::make_shared<detail::DiscNode>(cx, cy, r));
}
LevelSet LevelSet::star(double cx, double cy, double r0, double amp, int k) {
  return LevelSet(std::make_shared<detail::StarNode>(cx, cy, r0, amp, k));
}
LevelSet LevelSet::box(double x0, double y0, double x1, double y1) {
  return LevelSet(std::make_shared<detail::BoxNode>(x0, y0, x1, y1));
}
LevelSet LevelSet::custom(std::function<double(const Vec2&)> f) {
  return LevelSet(std::make_shared<detail::CustomNode>(std::move(f)));
}

LevelSet LevelSet::affine(const Eigen::Matrix2d& A, const Vec2& b) const {
  auto n = std::make_shared<detail::AffineNode>();
  n->sub = node_;
  n->A = A;
  n->b = b;
  return LevelSet(n);
}

double LevelSet::operator()(const Vec2& p) const { return node_->eval(p); }

namespace {
std::shared_ptr<detail::CombineNode> combine_node(detail::Comb op,
                                                  std::shared_ptr<const detail::LevelSetNode> a,
                                                  std::shared_ptr<const detail::LevelSetNode> b) {
  auto n = std::make_shared<detail::CombineNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}
}  // namespace

LevelSet unite(const LevelSet& a, const LevelSet& b) {
  return LevelSet(combine_node(detail::Comb::Max, a.node_, b.node_));
}
LevelSet intersect(const LevelSet& a, const LevelSet& b) {
  return LevelSet(combine_node(detail::Comb::Min, a.node_, b.node_));
}
LevelSet complement(const LevelSet& a) {
  return LevelSet(combine_node(detail::Comb::Neg, a.node_, a.node_));
}

CellClass classify_cell(const LevelSet& ls, const Box& cell, int sample_depth) {
  const int n = (1 << sample_depth) + 1;
  bool any_in = false, any_out = false;
  const Vec2 d = cell.size() / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = ls(Vec2(cell.lo.x() + i * d.x(), cell.lo.y() + j * d.y()));
      (v >= 0.0 ? any_in : any_out) = true;
      if (any_in && any_out) return CellClass::Cut;
    }
  }
  return any_in ? CellClass::Inside : CellClass::Outside;
}

Vec2 intersect_edge(const LevelSet& ls, const Vec2& p0, const Vec2& p1, double tol) {
  double f0 = ls(p0);
  double f1 = ls(p1);
  if (f0 * f1 > 0.0) throw SignError("intersect_edge: no sign change on segment");
  double t0 = 0.0, t1 = 1.0;
  auto at = [&](double t) { return Vec2(p0 + t * (p1 - p0)); };
  while (t1 - t0 > tol) {
    const double tm = 0.5 * (t0 + t1);
    const double fm = ls(at(tm));
    if (f0 * fm <= 0.0) {
      t1 = tm;
      f1 = fm;
    } else {
      t0 = tm;
      f0 = fm;
    }
  }
  return at(0.5 * (t0 + t1));
}

}  // namespace immergrid
