#pragma once

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "immergrid/geometry.hpp"

namespace immergrid {

struct InactiveTarget : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OddResolution : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyDomain : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structured background grid the hierarchy lives on. Level-m cells subdivide
// the base resolution dyadically.
struct EmbeddingGrid {
  Vec2 origin{-1.0, -1.0};
  Vec2 extent{2.0, 2.0};
  std::array<int, 2> resolution{16, 16};

  int cells_x(int level) const { return resolution[0] << level; }
  int cells_y(int level) const { return resolution[1] << level; }
  Vec2 cell_size(int level) const {
    return {extent.x() / cells_x(level), extent.y() / cells_y(level)};
  }
  Box cell_box(int level, int ix, int iy) const {
    const Vec2 d = cell_size(level);
    const Vec2 lo = origin + Vec2(ix * d.x(), iy * d.y());
    return {lo, lo + d};
  }
  bool operator==(const EmbeddingGrid&) const = default;
};

struct ElementId {
  int level = 0;
  int ix = 0;
  int iy = 0;
  auto operator<=>(const ElementId&) const = default;
};

// Active elements per level, forming a disjoint dyadic cover of the embedding
// domain. Level sets are kept ordered so traversal order is deterministic.
class HierarchicalMesh {
 public:
  static HierarchicalMesh uniform(const EmbeddingGrid& grid);

  const EmbeddingGrid& grid() const { return grid_; }
  int max_level() const { return static_cast<int>(levels_.size()) - 1; }
  bool is_active(const ElementId& e) const;
  std::size_t num_elements() const;
  // All active elements sorted by (level, ix, iy).
  std::vector<ElementId> elements() const;
  const std::set<std::pair<int, int>>& level_cells(int level) const { return levels_[level]; }
  Box element_box(const ElementId& e) const { return grid_.cell_box(e.level, e.ix, e.iy); }

  // Replaces each target with its four children. Throws InactiveTarget if a
  // target is not currently active.
  void refine(const std::vector<ElementId>& targets);
  // One refinement pass: refines every active element whose interior overlaps
  // the box.
  void refine_by_box(const Box& box);

  bool operator==(const HierarchicalMesh&) const = default;

 private:
  EmbeddingGrid grid_;
  std::vector<std::set<std::pair<int, int>>> levels_;
};

// Hierarchical derefinement: halves the base resolution, then for each level m
// refines every coarse cell whose interior overlaps a fine active element of
// level > m. The result is the coarsest mesh from which the input is reachable
// by one uniform subdivision pass. Throws OddResolution on odd base grids.
HierarchicalMesh coarsen(const HierarchicalMesh& fine);

enum class ElemTag { Inside, Cut, Outside };

struct TrimmedElement {
  ElementId id;
  ElemTag tag = ElemTag::Outside;
  Box box;
};

// Mesh with per-element domain classification. Only Inside/Cut elements take
// part in assembly and basis-function supports; Outside ones are retained for
// bookkeeping but never enumerated by elements().
struct TrimmedMesh {
  HierarchicalMesh mesh;
  LevelSet ls;
  int classify_depth = 2;
  std::vector<TrimmedElement> elems;             // Inside/Cut only, sorted by id
  std::map<ElementId, ElemTag> tags;             // all active elements

  const std::vector<TrimmedElement>& elements() const { return elems; }
  ElemTag tag(const ElementId& e) const { return tags.at(e); }
};

// Classifies every active element. Throws EmptyDomain if nothing is Inside/Cut.
std::shared_ptr<const TrimmedMesh> trim(const HierarchicalMesh& mesh, const LevelSet& ls,
                                        int classify_depth = 2);

}  // namespace immergrid
