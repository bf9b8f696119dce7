#pragma once

#include <functional>
#include <memory>

#include "immergrid/common.hpp"

namespace immergrid {

// Thrown by intersect_edge when both endpoints lie strictly on the same side.
struct SignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
struct LevelSetNode;
}

// Implicit domain description. The physical domain is { psi >= 0 }: a value of
// exactly zero counts as inside. Composable as an expression tree; composition
// uses min/max (intersection/union) and negation (complement), so the result
// is a level set function but generally not a signed distance.
class LevelSet {
 public:
  LevelSet();  // constant +1 (everything inside)

  static LevelSet constant(double v);
  // a*x + b*y + c, inside where the affine form is nonnegative.
  static LevelSet halfplane(double a, double b, double c);
  // r - |p - c|
  static LevelSet disc(double cx, double cy, double r);
  // r0 + amp*sin(k*theta) - |p - c|, theta = atan2(y-cy, x-cx), atan2(0,0) := 0.
  static LevelSet star(double cx, double cy, double r0, double amp, int k);
  // min(x-x0, x1-x, y-y0, y1-y): inside the axis-aligned box.
  static LevelSet box(double x0, double y0, double x1, double y1);
  // Arbitrary callable; used by tests and custom drivers.
  static LevelSet custom(std::function<double(const Vec2&)> f);

  // Evaluates this level set at A*p + b (pullback by an affine map).
  LevelSet affine(const Eigen::Matrix2d& A, const Vec2& b) const;

  double operator()(const Vec2& p) const;
  double operator()(double x, double y) const { return (*this)(Vec2(x, y)); }
  bool inside(const Vec2& p) const { return (*this)(p) >= 0.0; }

  friend LevelSet unite(const LevelSet& a, const LevelSet& b);      // max
  friend LevelSet intersect(const LevelSet& a, const LevelSet& b);  // min
  friend LevelSet complement(const LevelSet& a);                    // -psi

 private:
  explicit LevelSet(std::shared_ptr<const detail::LevelSetNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::LevelSetNode> node_;
};

LevelSet unite(const LevelSet& a, const LevelSet& b);
LevelSet intersect(const LevelSet& a, const LevelSet& b);
LevelSet complement(const LevelSet& a);

enum class CellClass { Inside, Outside, Cut };

// Samples psi on the (2^sample_depth + 1)^2 lattice of the cell. Mixed signs
// give Cut; all nonnegative Inside; all negative Outside. Purely sample-based:
// features that slip between lattice points at the chosen depth are not seen.
CellClass classify_cell(const LevelSet& ls, const Box& cell, int sample_depth = 2);

// Root of psi on the segment p0..p1 by bisection, to a parameter tolerance of
// tol * |p1 - p0|. Requires a sign change (psi(p0) * psi(p1) <= 0), else throws.
Vec2 intersect_edge(const LevelSet& ls, const Vec2& p0, const Vec2& p1, double tol = 1e-12);

}  // namespace immergrid
