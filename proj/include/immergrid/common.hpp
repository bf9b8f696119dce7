#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace immergrid {

using Vec2 = Eigen::Vector2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
// CSR storage; assembled operators are kept symmetric explicitly.
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Box {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{1.0, 1.0};

  Vec2 size() const { return hi - lo; }
  Vec2 center() const { return 0.5 * (lo + hi); }
  double area() const { return (hi.x() - lo.x()) * (hi.y() - lo.y()); }
  bool contains(const Vec2& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
  bool overlaps(const Box& o) const {
    return lo.x() < o.hi.x() && o.lo.x() < hi.x() && lo.y() < o.hi.y() && o.lo.y() < hi.y();
  }
  Vec2 corner(int k) const {  // 0..3 counterclockwise from lo
    switch (k & 3) {
      case 0: return lo;
      case 1: return {hi.x(), lo.y()};
      case 2: return hi;
      default: return {lo.x(), hi.y()};
    }
  }
};

// Deterministic 64-bit generator (splitmix64) so seeded runs are reproducible
// across platforms independent of libstdc++'s distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int uniform_int(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

 private:
  std::uint64_t state_ = 0;
};

}  // namespace immergrid
