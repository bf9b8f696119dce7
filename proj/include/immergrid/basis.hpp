#pragma once

#include <map>
#include <memory>
#include <stdexcept>

#include "immergrid/mesh.hpp"

namespace immergrid {

enum class Family { Lagrange, Bspline, THB };

struct UnsupportedFamilyOnHierarchy : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MeshMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scalar basis function identified by hierarchy level and tensor indices.
// Lagrange anchors are grid nodes (0..p*cells per axis); spline anchors are
// tensor B-spline function indices (0..cells+p-1 per axis).
struct ScalarAnchor {
  int level = 0;
  int ax = 0;
  int ay = 0;
  friend bool operator==(const ScalarAnchor&, const ScalarAnchor&) = default;
};

namespace detail {
struct SpaceData;  // family-specific internals (knots, truncation chains)
}

// Immutable function space over a trimmed mesh. DOFs are ordered by
// (level, anchor y, anchor x, component); vector DOF = anchor*components+comp.
class FunctionSpace {
 public:
  Family family = Family::Lagrange;
  int degree = 2;
  int components = 1;
  std::shared_ptr<const TrimmedMesh> tm;

  // Per element: supported anchors and their Bernstein expansion. Extraction
  // row r gives anchor anchors[r] on this element as coefficients of the
  // tensor Bernstein basis on [0,1]^2, ordered x-fastest (j = jy*(p+1)+jx).
  struct ElementBasis {
    std::vector<int> anchors;
    MatX extraction;
  };

  int num_anchors() const { return static_cast<int>(anchors_.size()); }
  int n() const { return num_anchors() * components; }
  const std::vector<ScalarAnchor>& anchors() const { return anchors_; }
  int dof_of(int anchor, int comp) const { return anchor * components + comp; }

  const ElementBasis& element_basis(const ElementId& e) const { return ebasis_.at(e); }
  const std::map<ElementId, ElementBasis>& all_element_bases() const { return ebasis_; }

  // Active Inside/Cut elements where the anchor's expansion is not
  // identically zero (truncation-aware for THB).
  const std::vector<ElementId>& physical_support(int anchor) const {
    return support_.at(anchor);
  }

  const detail::SpaceData& data() const { return *data_; }

 private:
  std::vector<ScalarAnchor> anchors_;
  std::map<ElementId, ElementBasis> ebasis_;
  std::vector<std::vector<ElementId>> support_;
  std::shared_ptr<const detail::SpaceData> data_;

  friend FunctionSpace build_space(std::shared_ptr<const TrimmedMesh>, Family, int, int);
};

// Throws UnsupportedFamilyOnHierarchy for Lagrange/Bspline on a refined mesh.
FunctionSpace build_space(std::shared_ptr<const TrimmedMesh> tm, Family family,
                          int degree, int components = 1);

// Values and physical gradients of the anchors supported on element e at a
// reference point in [0,1]^2 (scalar factors; components share them).
struct BasisEval {
  const std::vector<int>* anchors = nullptr;
  VecX values;
  MatX gradients;  // num x 2
};
BasisEval evaluate_basis(const FunctionSpace& s, const ElementId& e, const Vec2& ref);

// R with coarse basis = R * fine basis, sized coarse.n() x fine.n().
// Throws MeshMismatch unless coarse is built on coarsen(fine mesh) with the
// same family/degree/components.
SpMat restriction_matrix(const FunctionSpace& fine, const FunctionSpace& coarse);

}  // namespace immergrid
