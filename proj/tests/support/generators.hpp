#pragma once

// Deterministic fixtures for the test suites: 1D/2D fields and directly
// constructed random binary merge trees (unit segmentation, one vertex per
// node) with contexts assembled the same way the pipeline does.

#include <random>
#include <vector>

#include "mtlocal/merge_tree.hpp"
#include "mtlocal/scalar_grid.hpp"

namespace mtltest {

inline mtl::ScalarGrid grid1d(std::vector<double> values) {
  mtl::ScalarGrid g;
  g.dims = {static_cast<std::int64_t>(values.size())};
  g.values = std::move(values);
  return g;
}

inline mtl::ScalarGrid grid2d(std::int64_t w, std::int64_t h, std::vector<double> values) {
  mtl::ScalarGrid g;
  g.dims = {w, h};
  g.values = std::move(values);
  return g;
}

inline mtl::ScalarGrid random_field(std::mt19937& rng, std::vector<std::int64_t> dims) {
  mtl::ScalarGrid g;
  g.dims = std::move(dims);
  std::int64_t n = 1;
  for (auto d : g.dims) n *= d;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  g.values.resize(static_cast<std::size_t>(n));
  for (auto& v : g.values) v = u(rng);
  return g;
}

inline mtl::TreeContext context_of(const mtl::ScalarGrid& g,
                                   mtl::TreeVariant variant = mtl::TreeVariant::split,
                                   double simplify = 0.0) {
  return mtl::build_context(g, variant, simplify);
}

/// Random binary merge tree with the given number of leaves (0 = a lone
/// root node). Split-variant value ordering: every parent lies strictly below
/// its children. Vertices equal node ids; every arc owns one vertex.
inline mtl::TreeContext random_tree_context(std::mt19937& rng, int leaves) {
  mtl::MergeTree t;
  t.variant = mtl::TreeVariant::split;
  std::uniform_real_distribution<double> u(0.0, 1.0);

  if (leaves <= 0) {
    mtl::TreeNode n;
    n.id = 0;
    n.vertex = 0;
    n.value = u(rng);
    n.kind = mtl::NodeKind::root;
    t.nodes.push_back(n);
    t.root = 0;
  } else {
    auto add_node = [&](double value, mtl::NodeKind kind) {
      mtl::TreeNode n;
      n.id = static_cast<mtl::NodeId>(t.nodes.size());
      n.vertex = n.id;
      n.value = value;
      n.kind = kind;
      t.nodes.push_back(n);
      return n.id;
    };
    // Top-down: the subtree above `lo` with `budget` leaves.
    auto build = [&](auto&& self, double lo, int budget) -> mtl::NodeId {
      if (budget == 1)
        return add_node(lo + (1.0 - lo) * (0.5 + 0.5 * u(rng)), mtl::NodeKind::leaf);
      const double v = lo + (1.0 - lo) * 0.25 * u(rng);
      const mtl::NodeId s = add_node(v, mtl::NodeKind::saddle);
      std::uniform_int_distribution<int> split(1, budget - 1);
      const int left = split(rng);
      const mtl::NodeId c1 = self(self, v, left);
      const mtl::NodeId c2 = self(self, v, budget - left);
      t.nodes[static_cast<std::size_t>(s)].children = {std::min(c1, c2), std::max(c1, c2)};
      t.nodes[static_cast<std::size_t>(c1)].parent = s;
      t.nodes[static_cast<std::size_t>(c2)].parent = s;
      return s;
    };
    const double root_value = 0.05 * u(rng);
    const mtl::NodeId root = add_node(root_value, mtl::NodeKind::root);
    const mtl::NodeId top = build(build, root_value + 0.05, leaves);
    t.nodes[static_cast<std::size_t>(root)].children = {top};
    t.nodes[static_cast<std::size_t>(top)].parent = root;
    t.root = root;
  }

  mtl::Segmentation seg;
  seg.arc_of.resize(t.nodes.size());
  for (std::size_t i = 0; i < t.nodes.size(); ++i)
    seg.arc_of[i] = static_cast<mtl::NodeId>(i);
  seg.arc_count.assign(t.nodes.size(), 1);

  mtl::PersistencePairing pairing = mtl::pair_persistence(t);
  return mtl::make_context(std::move(t), std::move(seg), std::move(pairing));
}

}  // namespace mtltest
