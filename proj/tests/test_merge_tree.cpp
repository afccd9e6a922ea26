#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "mtlocal/errors.hpp"
#include "mtlocal/merge_tree.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace mtl;
using mtltest::grid1d;
using mtltest::grid2d;

namespace {

// Structural sanity shared by every construction test.
void check_tree_invariants(const MergeTree& t, const Segmentation& seg, std::int64_t n_vertices) {
  REQUIRE(t.root != kNoNode);
  std::int64_t leaves = 0, saddles = 0, roots = 0;
  for (const auto& n : t.nodes) {
    switch (n.kind) {
      case NodeKind::leaf:
        ++leaves;
        CHECK(n.children.empty());
        break;
      case NodeKind::saddle:
        ++saddles;
        CHECK(n.children.size() == 2);
        break;
      case NodeKind::root:
        ++roots;
        CHECK(n.children.size() <= 1);
        break;
    }
    for (auto c : n.children) CHECK(t.node(c).parent == n.id);
    if (n.id != t.root) {
      REQUIRE(n.parent != kNoNode);
      const auto& pc = t.node(n.parent).children;
      CHECK(std::count(pc.begin(), pc.end(), n.id) == 1);
    }
    // canonical child order: ascending creation vertex
    for (std::size_t k = 1; k < n.children.size(); ++k)
      CHECK(t.node(n.children[k - 1]).vertex < t.node(n.children[k]).vertex);
  }
  CHECK(roots == 1);
  if (t.node_count() > 1) CHECK(leaves == saddles + 1);

  // segmentation partitions the vertices
  CHECK(static_cast<std::int64_t>(seg.arc_of.size()) == n_vertices);
  CHECK(std::accumulate(seg.arc_count.begin(), seg.arc_count.end(), std::int64_t{0}) ==
        n_vertices);
  std::vector<std::int64_t> counted(t.nodes.size(), 0);
  for (auto a : seg.arc_of) {
    REQUIRE(a >= 0);
    REQUIRE(a < t.node_count());
    ++counted[static_cast<std::size_t>(a)];
  }
  for (std::size_t i = 0; i < counted.size(); ++i)
    CHECK(counted[i] == seg.arc_count[i]);
}

void check_pairing_invariants(const MergeTree& t, const PersistencePairing& p) {
  for (std::int64_t i = 0; i < t.node_count(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const NodeId j = p.partner[ii];
    REQUIRE(j != kNoNode);
    CHECK(p.partner[static_cast<std::size_t>(j)] == i);
    CHECK(p.birth[ii] <= p.death[ii]);
    CHECK(p.pers[ii] == p.death[ii] - p.birth[ii]);
    CHECK(p.birth[ii] == p.birth[static_cast<std::size_t>(j)]);
    CHECK(p.death[ii] == p.death[static_cast<std::size_t>(j)]);
    CHECK(std::min(t.node(i).value, t.node(j).value) == p.birth[ii]);
    CHECK(std::max(t.node(i).value, t.node(j).value) == p.death[ii]);
  }
}

}  // namespace

TEST_CASE("split tree of [0 2 1 3]") {
  const auto ts = build_merge_tree(grid1d({0, 2, 1, 3}), TreeVariant::split);
  const auto& t = ts.tree;
  REQUIRE(t.node_count() == 4);
  check_tree_invariants(t, ts.seg, 4);

  // creation order: leaf v3, leaf v1, saddle v2, root v0
  CHECK(t.node(0).vertex == 3);
  CHECK(t.node(0).kind == NodeKind::leaf);
  CHECK(t.node(1).vertex == 1);
  CHECK(t.node(1).kind == NodeKind::leaf);
  CHECK(t.node(2).vertex == 2);
  CHECK(t.node(2).kind == NodeKind::saddle);
  CHECK(t.node(2).children == std::vector<NodeId>{1, 0});
  CHECK(t.node(3).vertex == 0);
  CHECK(t.node(3).kind == NodeKind::root);
  CHECK(t.root == 3);

  CHECK(ts.seg.arc_of == std::vector<NodeId>{3, 1, 2, 0});

  const auto p = pair_persistence(t);
  check_pairing_invariants(t, p);
  CHECK(p.partner[0] == 3);  // global leaf pairs with the root
  CHECK(p.pers[0] == 3.0);
  CHECK(p.partner[1] == 2);  // younger leaf dies at the saddle
  CHECK(p.pers[1] == 1.0);
  CHECK(p.birth[1] == 1.0);
  CHECK(p.death[1] == 2.0);
}

TEST_CASE("join tree of [0 2 1 3]") {
  const auto ts = build_merge_tree(grid1d({0, 2, 1, 3}), TreeVariant::join);
  const auto& t = ts.tree;
  REQUIRE(t.node_count() == 4);
  check_tree_invariants(t, ts.seg, 4);
  CHECK(t.node(0).vertex == 0);  // minimum swept first
  CHECK(t.node(1).vertex == 2);
  CHECK(t.node(2).vertex == 1);  // saddle at the interior maximum of the sweep
  CHECK(t.node(2).kind == NodeKind::saddle);
  CHECK(t.node(3).vertex == 3);
  CHECK(t.node(3).kind == NodeKind::root);

  const auto p = pair_persistence(t);
  check_pairing_invariants(t, p);
  CHECK(p.partner[0] == 3);
  CHECK(p.pers[0] == 3.0);
  CHECK(p.partner[1] == 2);
  CHECK(p.birth[1] == 1.0);
  CHECK(p.death[1] == 2.0);
}

TEST_CASE("constant field collapses to leaf plus root") {
  const auto ts = build_merge_tree(grid1d({5, 5, 5}), TreeVariant::split);
  REQUIRE(ts.tree.node_count() == 2);
  CHECK(ts.tree.node(0).vertex == 0);
  CHECK(ts.tree.node(0).kind == NodeKind::leaf);
  CHECK(ts.tree.node(1).vertex == 2);
  CHECK(ts.tree.node(1).kind == NodeKind::root);
  check_tree_invariants(ts.tree, ts.seg, 3);

  const auto p = pair_persistence(ts.tree);
  CHECK(p.pers[0] == 0.0);
  CHECK(p.partner[0] == 1);
}

TEST_CASE("single vertex field yields a lone root") {
  const auto ts = build_merge_tree(grid1d({7}), TreeVariant::split);
  REQUIRE(ts.tree.node_count() == 1);
  CHECK(ts.tree.node(0).kind == NodeKind::root);
  CHECK(ts.tree.root == 0);
  const auto p = pair_persistence(ts.tree);
  CHECK(p.partner[0] == 0);
  CHECK(p.pers[0] == 0.0);
}

TEST_CASE("multi-saddle splits into a binary chain") {
  // 3x3 grid: maxima at v1, v3, v8 all meeting the center v4 (value 1).
  const auto g = grid2d(3, 3, {0, 8, 0, 7, 1, 0, 0, 0, 9});
  const auto ts = build_merge_tree(g, TreeVariant::split);
  const auto& t = ts.tree;
  REQUIRE(t.node_count() == 6);
  check_tree_invariants(t, ts.seg, 9);

  // creation: leaves v8(9), v1(8), v3(7); then a chain of two saddles at v4.
  CHECK(t.node(0).vertex == 8);
  CHECK(t.node(1).vertex == 1);
  CHECK(t.node(2).vertex == 3);
  CHECK(t.node(3).kind == NodeKind::saddle);
  CHECK(t.node(4).kind == NodeKind::saddle);
  CHECK(t.node(3).value == 1.0);
  CHECK(t.node(4).value == 1.0);

  // fold-left over child tops sorted by creation vertex: (v1, v3) first, then v8
  CHECK(t.node(3).children == std::vector<NodeId>{1, 2});
  CHECK(t.node(4).children == std::vector<NodeId>{3, 0});

  // only the chain top owns the merge vertex
  CHECK(ts.seg.arc_count[3] == 0);
  CHECK(ts.seg.arc_of[4] == 4);

  const auto p = pair_persistence(t);
  check_pairing_invariants(t, p);
  CHECK(p.partner[2] == 3);  // v3 (7) dies first
  CHECK(p.pers[2] == 6.0);
  CHECK(p.partner[1] == 4);  // v1 (8) dies at the chain top
  CHECK(p.pers[1] == 7.0);
  CHECK(p.partner[0] == 5);  // v8 (9) survives to the root
}

TEST_CASE("pairing matches flood-fill component counts") {
  std::mt19937 rng(1234);
  for (int iter = 0; iter < 30; ++iter) {
    std::vector<std::int64_t> dims;
    switch (iter % 3) {
      case 0: dims = {9}; break;
      case 1: dims = {5, 4}; break;
      default: dims = {3, 3, 3}; break;
    }
    const auto g = mtltest::random_field(rng, dims);

    for (const bool split : {true, false}) {
      const auto ts = build_merge_tree(g, split ? TreeVariant::split : TreeVariant::join);
      check_tree_invariants(ts.tree, ts.seg, g.size());
      const auto p = pair_persistence(ts.tree);
      check_pairing_invariants(ts.tree, p);

      for (const double t : mtltest::generic_thresholds(g)) {
        int alive = 0;
        for (std::int64_t i = 0; i < ts.tree.node_count(); ++i)
          if (ts.tree.is_leaf(i) && p.birth[static_cast<std::size_t>(i)] < t &&
              t < p.death[static_cast<std::size_t>(i)])
            ++alive;
        CHECK(alive == mtltest::level_components(g, t, split));
      }
    }
  }
}

TEST_CASE("simplify cancels the low-persistence pair") {
  const auto g = grid1d({0, 2, 1, 3});
  const auto ts = build_merge_tree(g, TreeVariant::split);
  const auto p = pair_persistence(ts.tree);

  const auto s = simplify(ts.tree, ts.seg, p, 0.4);  // cutoff 0.4 * 3 = 1.2 > pers 1
  REQUIRE(s.tree.node_count() == 2);
  CHECK(s.tree.node(0).vertex == 3);
  CHECK(s.tree.node(0).kind == NodeKind::leaf);
  CHECK(s.tree.node(1).vertex == 0);
  CHECK(s.tree.node(1).kind == NodeKind::root);
  check_tree_invariants(s.tree, s.seg, 4);

  // cancelled arcs merged into the surviving sibling
  CHECK(s.seg.arc_of == std::vector<NodeId>{1, 0, 0, 0});
  CHECK(s.old_to_new == std::vector<NodeId>{0, kNoNode, kNoNode, 1});
  check_pairing_invariants(s.tree, s.pairing);
  CHECK(s.pairing.pers[0] == 3.0);

  // below any pair's persistence nothing changes
  const auto keep = simplify(ts.tree, ts.seg, p, 0.1);
  CHECK(keep.tree.node_count() == 4);

  CHECK_THROWS_AS(simplify(ts.tree, ts.seg, p, -0.1), ConfigError);
  CHECK_THROWS_AS(simplify(ts.tree, ts.seg, p, 1.5), ConfigError);
}

TEST_CASE("simplify drains all below-threshold pairs") {
  std::mt19937 rng(99);
  for (int iter = 0; iter < 20; ++iter) {
    const auto g = mtltest::random_field(rng, {6, 4});
    const auto ts = build_merge_tree(g, TreeVariant::split);
    const auto p = pair_persistence(ts.tree);
    const double thr = 0.35;
    const auto s = simplify(ts.tree, ts.seg, p, thr);
    check_tree_invariants(s.tree, s.seg, g.size());
    check_pairing_invariants(s.tree, s.pairing);

    double lo = ts.tree.nodes.front().value, hi = lo;
    for (const auto& n : ts.tree.nodes) {
      lo = std::min(lo, n.value);
      hi = std::max(hi, n.value);
    }
    // root pair exempt; every surviving leaf/saddle pair clears the cutoff
    const double cut = thr * (hi - lo);
    for (std::int64_t i = 0; i < s.tree.node_count(); ++i)
      if (s.tree.is_leaf(i) && s.tree.node(s.pairing.partner[static_cast<std::size_t>(i)]).kind ==
                                   NodeKind::saddle)
        CHECK(s.pairing.pers[static_cast<std::size_t>(i)] >= cut);
  }
}

TEST_CASE("unpaired leaf walks past the dying child") {
  const auto g = grid1d({0, 2, 1, 3});
  const auto ts = build_merge_tree(g, TreeVariant::split);
  const auto p = pair_persistence(ts.tree);

  CHECK(unpaired_leaf(ts.tree, p, 2) == 0);  // subtree of the saddle: survivor is v3
  CHECK(unpaired_leaf(ts.tree, p, 3) == 0);  // full tree: the global max
  CHECK(unpaired_leaf(ts.tree, p, 0) == 0);
  CHECK(unpaired_leaf(ts.tree, p, 1) == 1);

  // property: the survivor is the one leaf of T[r] whose partner is outside
  std::mt19937 rng(5);
  for (int iter = 0; iter < 15; ++iter) {
    const auto gr = mtltest::random_field(rng, {5, 3});
    const auto trs = build_merge_tree(gr, TreeVariant::split);
    const auto pr = pair_persistence(trs.tree);
    for (std::int64_t r = 0; r < trs.tree.node_count(); ++r) {
      NodeId expect;
      if (r == trs.tree.root) {
        // full tree: the leaf carrying the global pair
        expect = pr.partner[static_cast<std::size_t>(r)];
      } else {
        const auto inside = subtree_nodes(trs.tree, r);
        const std::set<NodeId> in_set(inside.begin(), inside.end());
        std::vector<NodeId> outside_paired;
        for (auto n : inside)
          if (trs.tree.is_leaf(n) && !in_set.count(pr.partner[static_cast<std::size_t>(n)]))
            outside_paired.push_back(n);
        REQUIRE(outside_paired.size() == 1);
        expect = outside_paired[0];
      }
      CHECK(unpaired_leaf(trs.tree, pr, r) == expect);
    }
  }
}

TEST_CASE("subtree stats aggregate size, volume, inner persistence") {
  const auto g = grid1d({0, 2, 1, 3});
  const auto ts = build_merge_tree(g, TreeVariant::split);
  const auto p = pair_persistence(ts.tree);

  const auto s2 = subtree_stats(ts.tree, ts.seg, p, 2);
  CHECK(s2.size == 3);
  CHECK(s2.volume == 3);
  CHECK(s2.agg_pers == 1.0);

  const auto sr = subtree_stats(ts.tree, ts.seg, p, 3);
  CHECK(sr.size == 4);
  CHECK(sr.volume == 4);
  CHECK(sr.agg_pers == 4.0);

  const auto sl = subtree_stats(ts.tree, ts.seg, p, 0);
  CHECK(sl.size == 1);
  CHECK(sl.volume == 1);
  CHECK(sl.agg_pers == 0.0);
}

TEST_CASE("context caches are consistent") {
  const auto ctx = mtltest::context_of(grid1d({0, 2, 1, 3}));
  REQUIRE(ctx.tree.node_count() == 4);
  CHECK(ctx.unpaired == std::vector<NodeId>{0, 1, 0, 0});
  CHECK(ctx.upath_child == std::vector<NodeId>{kNoNode, kNoNode, 0, 2});
  CHECK(ctx.dummy_value == std::vector<double>{1.0, 1.0, 0.0, 0.0});

  // postorder puts children before parents
  std::vector<std::int64_t> pos(4);
  for (std::size_t k = 0; k < ctx.postorder.size(); ++k)
    pos[static_cast<std::size_t>(ctx.postorder[k])] = static_cast<std::int64_t>(k);
  for (const auto& n : ctx.tree.nodes)
    for (auto c : n.children)
      CHECK(pos[static_cast<std::size_t>(c)] < pos[static_cast<std::size_t>(n.id)]);

  // stats cached per node match the standalone computation
  for (std::int64_t i = 0; i < 4; ++i) {
    const auto s = subtree_stats(ctx.tree, ctx.seg, ctx.pairing, i);
    CHECK(ctx.stats[static_cast<std::size_t>(i)].size == s.size);
    CHECK(ctx.stats[static_cast<std::size_t>(i)].volume == s.volume);
    CHECK(ctx.stats[static_cast<std::size_t>(i)].agg_pers == s.agg_pers);
  }
}

TEST_CASE("build_context applies simplification") {
  const auto ctx = mtltest::context_of(grid1d({0, 2, 1, 3}), TreeVariant::split, 0.4);
  CHECK(ctx.tree.node_count() == 2);
  CHECK(ctx.simplify_threshold == 0.4);
}

TEST_CASE("region_vertices lists the subtree's arc vertices sorted") {
  const auto ctx = mtltest::context_of(grid1d({0, 2, 1, 3}));
  CHECK(region_vertices(ctx, 2) == std::vector<VertexId>{1, 2, 3});
  CHECK(region_vertices(ctx, 3) == std::vector<VertexId>{0, 1, 2, 3});
  CHECK(region_vertices(ctx, 0) == std::vector<VertexId>{3});
}

TEST_CASE("generated random merge trees satisfy the invariants") {
  std::mt19937 rng(77);
  for (int iter = 0; iter < 25; ++iter) {
    const auto ctx = mtltest::random_tree_context(rng, iter % 7);
    check_tree_invariants(ctx.tree, ctx.seg, ctx.tree.node_count());
    check_pairing_invariants(ctx.tree, ctx.pairing);
  }
}
