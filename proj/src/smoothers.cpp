#include "immergrid/smoothers.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <Eigen/Dense>

namespace immergrid {

namespace {

bool support_subset(const std::vector<ElementId>& inner, const std::vector<ElementId>& outer) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end(),
                       [](const ElementId& a, const ElementId& b) { return a < b; });
}

}  // namespace

BlockLayout select_blocks(const FunctionSpace& space) {
  const int c = space.components;
  const int p = space.degree;
  BlockLayout L;
  for (int aj = 0; aj < space.num_anchors(); ++aj) {
    if (space.family == Family::Lagrange) {
      const ScalarAnchor& A = space.anchors()[aj];
      if (A.ax % p != 0 || A.ay % p != 0) continue;  // nodal owners only
    }
    const auto& supj = space.physical_support(aj);
    std::set<int> cands;
    for (const auto& e : supj)
      for (int k : space.element_basis(e).anchors) cands.insert(k);
    std::vector<int> members;
    for (int ak : cands)
      if (support_subset(space.physical_support(ak), supj)) members.push_back(ak);
    for (int comp = 0; comp < c; ++comp) {
      L.owners.push_back(space.dof_of(aj, comp));
      std::vector<int> dofs;
      dofs.reserve(members.size());
      for (int ak : members) dofs.push_back(space.dof_of(ak, comp));
      L.blocks.push_back(std::move(dofs));
    }
  }
  // Safety net: any DOF not captured by an encapsulating block gets a
  // singleton so the partition always covers the space.
  std::vector<char> covered(space.n(), 0);
  for (const auto& blk : L.blocks)
    for (int d : blk) covered[d] = 1;
  for (int d = 0; d < space.n(); ++d)
    if (!covered[d]) {
      L.owners.push_back(d);
      L.blocks.push_back({d});
    }
  // Keep deterministic owner order even if singletons were appended.
  std::vector<int> order(L.owners.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return L.owners[a] < L.owners[b]; });
  BlockLayout sorted;
  sorted.owners.reserve(order.size());
  sorted.blocks.reserve(order.size());
  for (int i : order) {
    sorted.owners.push_back(L.owners[i]);
    sorted.blocks.push_back(std::move(L.blocks[i]));
  }
  return sorted;
}

BlockLayout singleton_blocks(const FunctionSpace& space) {
  BlockLayout L;
  L.owners.resize(space.n());
  L.blocks.resize(space.n());
  for (int d = 0; d < space.n(); ++d) {
    L.owners[d] = d;
    L.blocks[d] = {d};
  }
  return L;
}

namespace {

// Element -> blocks whose members are supported on it.
std::map<ElementId, std::vector<int>> block_incidence(const BlockLayout& L,
                                                      const FunctionSpace& space) {
  std::map<ElementId, std::vector<int>> incid;
  for (std::size_t b = 0; b < L.blocks.size(); ++b) {
    std::set<ElementId> elems;
    for (int d : L.blocks[b]) {
      const int anchor = d / space.components;
      for (const auto& e : space.physical_support(anchor)) elems.insert(e);
    }
    for (const auto& e : elems) incid[e].push_back(static_cast<int>(b));
  }
  return incid;
}

}  // namespace

ColorClasses color_blocks(const BlockLayout& layout, const FunctionSpace& space) {
  const auto incid = block_incidence(layout, space);
  const int nb = static_cast<int>(layout.blocks.size());
  // Adjacency lists from shared elements.
  std::vector<std::set<int>> adj(nb);
  for (const auto& [e, bl] : incid)
    for (std::size_t i = 0; i < bl.size(); ++i)
      for (std::size_t j = i + 1; j < bl.size(); ++j) {
        adj[bl[i]].insert(bl[j]);
        adj[bl[j]].insert(bl[i]);
      }
  ColorClasses cc;
  cc.color_of.assign(nb, -1);
  for (int b = 0; b < nb; ++b) {
    std::set<int> used;
    for (int o : adj[b])
      if (cc.color_of[o] >= 0) used.insert(cc.color_of[o]);
    int col = 0;
    while (used.count(col)) ++col;
    cc.color_of[b] = col;
    cc.num_colors = std::max(cc.num_colors, col + 1);
  }
  return cc;
}

int max_blocks_per_element(const BlockLayout& layout, const FunctionSpace& space) {
  int mx = 0;
  for (const auto& [e, bl] : block_incidence(layout, space))
    mx = std::max(mx, static_cast<int>(bl.size()));
  return mx;
}

std::vector<Eigen::LLT<MatX>> factorize_blocks(const SpMat& A, BlockLayout& layout,
                                               double filter_ratio) {
  std::vector<Eigen::LLT<MatX>> out;
  out.reserve(layout.blocks.size());
  for (std::size_t b = 0; b < layout.blocks.size(); ++b) {
    std::vector<int>& dofs = layout.blocks[b];
    MatX Ab;
    auto gather = [&] {
      const int s = static_cast<int>(dofs.size());
      Ab.resize(s, s);
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) Ab(i, j) = A.coeff(dofs[i], dofs[j]);
    };
    gather();
    if (filter_ratio > 0.0) {
      while (true) {
        if (dofs.empty())
          throw EmptyBlockAfterFilter("factorize_blocks: all DOFs filtered from a block");
        Eigen::SelfAdjointEigenSolver<MatX> es(Ab);
        if (es.eigenvalues()(0) >= filter_ratio * Ab.diagonal().maxCoeff()) break;
        int worst = 0;
        es.eigenvectors().col(0).cwiseAbs().maxCoeff(&worst);
        dofs.erase(dofs.begin() + worst);
        gather();
      }
    }
    if (dofs.empty())
      throw EmptyBlockAfterFilter("factorize_blocks: empty block");
    out.emplace_back(Ab);
  }
  return out;
}

Smoother::Smoother(const SpMat& A, SmootherKind kind, SchwarzPartition part, double gamma)
    : A_(&A), kind_(kind), part_(std::move(part)), gamma_(gamma) {
  if (kind_ == SmootherKind::Jacobi) diag_ = A.diagonal();
}

VecX Smoother::apply(const VecX& r, SweepDir dir) const {
  const int n = static_cast<int>(r.size());
  if (kind_ == SmootherKind::Jacobi)
    return gamma_ * (r.array() / diag_.array()).matrix();

  if (kind_ == SmootherKind::AdditiveSchwarz) {
    VecX x = VecX::Zero(n);
    for (std::size_t b = 0; b < part_.layout.blocks.size(); ++b) {
      const auto& dofs = part_.layout.blocks[b];
      VecX rb(dofs.size());
      for (std::size_t i = 0; i < dofs.size(); ++i) rb[i] = r[dofs[i]];
      const VecX y = part_.factor[b].solve(rb);
      for (std::size_t i = 0; i < dofs.size(); ++i) x[dofs[i]] += y[i];
    }
    return gamma_ * x;
  }

  // Colored multiplicative sweep (Gauss-Seidel uses singleton blocks). The
  // residual is frozen within a color; same-color blocks touch disjoint DOFs.
  const int C = part_.colors.num_colors;
  VecX x = VecX::Zero(n);
  VecX cur = r;
  for (int step = 0; step < C; ++step) {
    const int col = dir == SweepDir::Forward ? C - 1 - step : step;
    VecX delta = VecX::Zero(n);
    bool any = false;
    for (std::size_t b = 0; b < part_.layout.blocks.size(); ++b) {
      if (part_.colors.color_of[b] != col) continue;
      const auto& dofs = part_.layout.blocks[b];
      VecX rb(dofs.size());
      for (std::size_t i = 0; i < dofs.size(); ++i) rb[i] = cur[dofs[i]];
      const VecX y = part_.factor[b].solve(rb);
      for (std::size_t i = 0; i < dofs.size(); ++i) delta[dofs[i]] += y[i];
      any = true;
    }
    if (!any) continue;
    x += delta;
    if (step + 1 < C) cur -= (*A_) * delta;
  }
  return gamma_ * x;
}

VecX Smoother::apply_symmetric(const VecX& r) const {
  const VecX x1 = apply(r, SweepDir::Forward);
  return x1 + apply(r - (*A_) * x1, SweepDir::Reverse);
}

Smoother make_smoother(const SpMat& A, const FunctionSpace& space, const SmootherConfig& cfg) {
  SchwarzPartition part;
  switch (cfg.kind) {
    case SmootherKind::Jacobi:
    case SmootherKind::GaussSeidel:
      part.layout = singleton_blocks(space);
      break;
    case SmootherKind::AdditiveSchwarz:
    case SmootherKind::MultiplicativeSchwarz:
      part.layout = select_blocks(space);
      break;
  }
  part.max_nk = max_blocks_per_element(part.layout, space);
  if (cfg.kind != SmootherKind::Jacobi) {
    if (cfg.kind != SmootherKind::AdditiveSchwarz)
      part.colors = color_blocks(part.layout, space);
    part.factor = factorize_blocks(A, part.layout, cfg.filter_ratio);
  }
  double gamma = cfg.gamma;
  if (gamma <= 0.0) {
    const bool damped =
        cfg.kind == SmootherKind::Jacobi || cfg.kind == SmootherKind::AdditiveSchwarz;
    gamma = damped ? 1.0 / std::max(1, part.max_nk) : 1.0;
  }
  return Smoother(A, cfg.kind, std::move(part), gamma);
}

}  // namespace immergrid
