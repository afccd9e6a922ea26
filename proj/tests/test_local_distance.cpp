#include <doctest.h>

#include <random>

#include "mtlocal/errors.hpp"
#include "mtlocal/local_distance.hpp"
#include "support/generators.hpp"

using namespace mtl;

namespace {

RefinementConfig keep_all() {
  RefinementConfig cfg;
  cfg.node_ratio = cfg.volume_ratio = cfg.pers_ratio = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("truncated empty columns on the two-branch fixture") {
  const auto a = mtltest::context_of(mtltest::grid1d({0, 5, 1, 3}));
  const auto tb = compute_all_tables(a, a);
  // D'(T[saddle], theta): off-path leaf1 delete (1.0) + on-path leaf0 (0)
  // + the saddle's own delete (1.0)
  CHECK(tb.dp.tree1_empty[2] == 2.0);
  CHECK(tb.dp.empty_tree2[2] == 2.0);
  // any single-leaf cell treats that leaf as its own survivor
  CHECK(tb.dp.tree1_empty[0] == 0.0);
  CHECK(tb.dp.tree1_empty[1] == 0.0);
  // full tree: on-path saddle (2.0) + the root's own delete (2.5)
  CHECK(tb.dp.tree1_empty[3] == 4.5);
}

TEST_CASE("local distance of the inner subtrees equals 1.0") {
  const auto a = mtltest::context_of(mtltest::grid1d({0, 5, 1, 3}));
  const auto b = mtltest::context_of(mtltest::grid1d({0, 5, 1.5, 2.5}));
  const auto tb = compute_all_tables(a, b);
  CHECK(tb.dp.t(2, 2) == doctest::Approx(1.0).epsilon(1e-12));
  // identical truncations (0,5) vs (0,5): gamma adds nothing
  CHECK(lmted_from_tables(tb, a, b, 2, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lmted_pair(a, 2, b, 2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single-leaf subtrees compare by truncation alone") {
  const auto a = mtltest::context_of(mtltest::grid1d({0, 5}));
  const auto b = mtltest::context_of(mtltest::grid1d({0, 4}));
  // leaf subtree truncations (0,5) and (0,4): relabel = 1
  CHECK(lmted_pair(a, 0, b, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("all-pairs matrix matches per-pair recomputation") {
  std::mt19937 rng(2024);
  for (int iter = 0; iter < 12; ++iter) {
    const auto a = mtltest::random_tree_context(rng, 1 + static_cast<int>(rng() % 4));
    const auto b = mtltest::random_tree_context(rng, 1 + static_cast<int>(rng() % 4));
    const auto dm = lmted_all_pairs(a, b, keep_all());
    REQUIRE(dm.cols() == a.tree.node_count());
    REQUIRE(dm.rows() == b.tree.node_count());
    for (std::int64_t r = 0; r < dm.rows(); ++r)
      for (std::int64_t c = 0; c < dm.cols(); ++c) {
        REQUIRE(dm.present[dm.at(r, c)]);
        const double fresh =
            lmted_pair(a, dm.col_roots[static_cast<std::size_t>(c)], b,
                       dm.row_roots[static_cast<std::size_t>(r)]);
        CHECK(dm.value[dm.at(r, c)] == doctest::Approx(fresh).epsilon(1e-12));
      }
  }
}

TEST_CASE("self comparison has exact zero diagonal and bitwise symmetry") {
  std::mt19937 rng(2025);
  for (int iter = 0; iter < 8; ++iter) {
    const auto a = mtltest::random_tree_context(rng, 1 + static_cast<int>(rng() % 5));
    const auto dm = lmted_all_pairs(a, a, keep_all());
    REQUIRE(dm.rows() == dm.cols());
    for (std::int64_t r = 0; r < dm.rows(); ++r)
      for (std::int64_t c = 0; c < dm.cols(); ++c) {
        if (dm.row_roots[static_cast<std::size_t>(r)] ==
            dm.col_roots[static_cast<std::size_t>(c)])
          CHECK(dm.value[dm.at(r, c)] == 0.0);
        // mirrored entries are bitwise equal
        std::int64_t rc = -1, cr = -1;
        for (std::int64_t k = 0; k < dm.cols(); ++k)
          if (dm.col_roots[static_cast<std::size_t>(k)] ==
              dm.row_roots[static_cast<std::size_t>(r)])
            cr = k;
        for (std::int64_t k = 0; k < dm.rows(); ++k)
          if (dm.row_roots[static_cast<std::size_t>(k)] ==
              dm.col_roots[static_cast<std::size_t>(c)])
            rc = k;
        REQUIRE(rc >= 0);
        REQUIRE(cr >= 0);
        CHECK(dm.value[dm.at(r, c)] == dm.value[dm.at(rc, cr)]);
      }
  }
}

TEST_CASE("lmted_pair metric properties across subtrees") {
  std::mt19937 rng(2026);
  for (int iter = 0; iter < 15; ++iter) {
    const auto x = mtltest::random_tree_context(rng, 1 + static_cast<int>(rng() % 4));
    const auto y = mtltest::random_tree_context(rng, 1 + static_cast<int>(rng() % 4));
    const auto z = mtltest::random_tree_context(rng, 1 + static_cast<int>(rng() % 4));
    const NodeId ix = static_cast<NodeId>(rng() % static_cast<unsigned>(x.tree.node_count()));
    const NodeId iy = static_cast<NodeId>(rng() % static_cast<unsigned>(y.tree.node_count()));
    const NodeId iz = static_cast<NodeId>(rng() % static_cast<unsigned>(z.tree.node_count()));
    CHECK(lmted_pair(x, ix, x, ix) == 0.0);
    CHECK(lmted_pair(x, ix, y, iy) == lmted_pair(y, iy, x, ix));
    CHECK(lmted_pair(x, ix, z, iz) <=
          lmted_pair(x, ix, y, iy) + lmted_pair(y, iy, z, iz) + 1e-9);
  }
}

TEST_CASE("self mode drops identical and nested pairs") {
  const auto a = mtltest::context_of(mtltest::grid1d({0, 5, 1, 3}));
  RefinementConfig cfg = keep_all();
  cfg.self_mode = true;
  const auto dm = lmted_all_pairs(a, a, cfg);
  CHECK(dm.self_comparison);
  for (std::int64_t r = 0; r < dm.rows(); ++r)
    for (std::int64_t c = 0; c < dm.cols(); ++c) {
      const NodeId cr = dm.col_roots[static_cast<std::size_t>(c)];
      const NodeId rr = dm.row_roots[static_cast<std::size_t>(r)];
      if (cr == rr) CHECK(!dm.present[dm.at(r, c)]);
      // the two leaves stay comparable
      if ((cr == 0 && rr == 1) || (cr == 1 && rr == 0)) CHECK(dm.present[dm.at(r, c)]);
      // saddle and root strictly contain the leaves
      if (cr == 3 || rr == 3) CHECK(!dm.present[dm.at(r, c)]);
    }
}

TEST_CASE("config validation") {
  const auto a = mtltest::context_of(mtltest::grid1d({0, 5, 1, 3}));
  RefinementConfig bad;
  bad.node_ratio = 1.5;
  CHECK_THROWS_AS(lmted_all_pairs(a, a, bad), mtl::ConfigError);
}
