#include "immergrid/mesh.hpp"

#include <algorithm>

namespace immergrid {

HierarchicalMesh HierarchicalMesh::uniform(const EmbeddingGrid& grid) {
  HierarchicalMesh m;
  m.grid_ = grid;
  m.levels_.resize(1);
  for (int i = 0; i < grid.resolution[0]; ++i)
    for (int j = 0; j < grid.resolution[1]; ++j) m.levels_[0].insert({i, j});
  return m;
}

bool HierarchicalMesh::is_active(const ElementId& e) const {
  if (e.level < 0 || e.level >= static_cast<int>(levels_.size())) return false;
  return levels_[e.level].count({e.ix, e.iy}) > 0;
}

std::size_t HierarchicalMesh::num_elements() const {
  std::size_t n = 0;
  for (const auto& l : levels_) n += l.size();
  return n;
}

std::vector<ElementId> HierarchicalMesh::elements() const {
  std::vector<ElementId> out;
  out.reserve(num_elements());
  for (int m = 0; m < static_cast<int>(levels_.size()); ++m)
    for (const auto& [i, j] : levels_[m]) out.push_back({m, i, j});
  return out;
}

void HierarchicalMesh::refine(const std::vector<ElementId>& targets) {
  for (const auto& e : targets) {
    if (!is_active(e))
      throw InactiveTarget("refine: target (" + std::to_string(e.level) + "," +
                           std::to_string(e.ix) + "," + std::to_string(e.iy) +
                           ") is not active");
  }
  for (const auto& e : targets) {
    levels_[e.level].erase({e.ix, e.iy});
    if (e.level + 1 >= static_cast<int>(levels_.size())) levels_.resize(e.level + 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) levels_[e.level + 1].insert({2 * e.ix + a, 2 * e.iy + b});
  }
  while (levels_.size() > 1 && levels_.back().empty()) levels_.pop_back();
}

void HierarchicalMesh::refine_by_box(const Box& box) {
  std::vector<ElementId> targets;
  for (const auto& e : elements())
    if (element_box(e).overlaps(box)) targets.push_back(e);
  refine(targets);
}

HierarchicalMesh coarsen(const HierarchicalMesh& fine) {
  const EmbeddingGrid& fg = fine.grid();
  if (fg.resolution[0] % 2 != 0 || fg.resolution[1] % 2 != 0)
    throw OddResolution("coarsen: base resolution must be even");

  EmbeddingGrid cg = fg;
  cg.resolution = {fg.resolution[0] / 2, fg.resolution[1] / 2};
  HierarchicalMesh coarse = HierarchicalMesh::uniform(cg);

  const int fine_max = fine.max_level();
  // trigger[m]: coarse level-m cells overlapped by a fine active element of
  // level > m. A coarse level-m cell covers fine level-l indices in blocks of
  // 2^(l-m+1) per axis (coarse level-m cells match fine level-(m-1) cells).
  std::vector<std::set<std::pair<int, int>>> trigger(std::max(fine_max, 1));
  for (int l = 1; l <= fine_max; ++l) {
    for (const auto& [a, b] : fine.level_cells(l)) {
      for (int m = 0; m < l && m < static_cast<int>(trigger.size()); ++m) {
        const int shift = l - m + 1;
        trigger[m].insert({a >> shift, b >> shift});
      }
    }
  }

  for (int m = 0; m < static_cast<int>(trigger.size()); ++m) {
    std::vector<ElementId> targets;
    for (const auto& [i, j] : trigger[m]) {
      if (coarse.is_active({m, i, j})) targets.push_back({m, i, j});
    }
    coarse.refine(targets);
  }
  return coarse;
}

std::shared_ptr<const TrimmedMesh> trim(const HierarchicalMesh& mesh, const LevelSet& ls,
                                        int classify_depth) {
  auto tm = std::make_shared<TrimmedMesh>();
  tm->mesh = mesh;
  tm->ls = ls;
  tm->classify_depth = classify_depth;
  for (const auto& e : mesh.elements()) {
    const Box box = mesh.element_box(e);
    const ElemTag tag = [&] {
      switch (classify_cell(ls, box, classify_depth)) {
        case CellClass::Inside: return ElemTag::Inside;
        case CellClass::Cut: return ElemTag::Cut;
        default: return ElemTag::Outside;
      }
    }();
    tm->tags.emplace(e, tag);
    if (tag != ElemTag::Outside) tm->elems.push_back({e, tag, box});
  }
  if (tm->elems.empty()) throw EmptyDomain("trim: no element intersects the domain");
  return tm;
}

}  // namespace immergrid
