#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "mtlocal/edit_distance.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace mtl;

namespace {

double matching_bruteforce(const std::vector<double>& cost, int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += cost[static_cast<std::size_t>(i * n + perm[static_cast<std::size_t>(i)])];
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("assignment solver on fixed matrices") {
  CHECK(min_cost_matching({0, 1, 1, 0}, 2).cost == 0.0);
  CHECK(min_cost_matching({0, 1, 1, 0}, 2).assignment == std::vector<int>{0, 1});
  CHECK(min_cost_matching({2, 1, 1, 2}, 2).cost == 2.0);
  CHECK(min_cost_matching({2, 1, 1, 2}, 2).assignment == std::vector<int>{1, 0});
  CHECK(min_cost_matching({}, 0).cost == 0.0);
  CHECK(min_cost_matching({7.5}, 1).cost == 7.5);
}

TEST_CASE("assignment solver equals permutation enumeration") {
  std::mt19937 rng(321);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int iter = 0; iter < 40; ++iter) {
    const int n = 1 + static_cast<int>(rng() % 6);
    std::vector<double> cost(static_cast<std::size_t>(n * n));
    for (auto& c : cost) c = u(rng);
    const auto r = min_cost_matching(cost, n);
    CHECK(r.cost == doctest::Approx(matching_bruteforce(cost, n)).epsilon(1e-12));
    // assignment is a permutation achieving the cost
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const int j = r.assignment[static_cast<std::size_t>(i)];
      REQUIRE(j >= 0);
      REQUIRE(j < n);
      CHECK(!used[static_cast<std::size_t>(j)]);
      used[static_cast<std::size_t>(j)] = 1;
      s += cost[static_cast<std::size_t>(i * n + j)];
    }
    CHECK(s == r.cost);
  }
}

TEST_CASE("empty-tree columns sum the delete costs") {
  // pairs of [0 2 1 3]: pers 3 on leaf0/root, pers 1 on leaf1/saddle
  const auto small = mtltest::context_of(mtltest::grid1d({0, 2, 1, 3}));
  const auto dcs = compute_dc_tables(small, small);
  CHECK(dcs.tree1_empty[3] == 4.0);
  CHECK(dcs.empty_tree2[3] == 4.0);

  // pairs of [0 5 1 3]: pers 5 on leaf0/root, pers 2 on leaf1/saddle
  const auto ctx = mtltest::context_of(mtltest::grid1d({0, 5, 1, 3}));
  const auto dc = compute_dc_tables(ctx, ctx);
  CHECK(dc.tree1_empty[3] == 7.0);
  CHECK(dc.tree1_empty[2] == 4.5);
  CHECK(dc.tree1_empty[0] == 2.5);
  CHECK(dc.tree1_empty[1] == 1.0);
  // forests exclude the subtree root's own point
  CHECK(dc.forest1_empty[2] == 3.5);
  CHECK(dc.forest1_empty[0] == 0.0);
}

TEST_CASE("mted on the two-branch fixture equals 1.0") {
  const auto a = mtltest::context_of(mtltest::grid1d({0, 5, 1, 3}));
  const auto b = mtltest::context_of(mtltest::grid1d({0, 5, 1.5, 2.5}));
  CHECK(mted(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mted(a, a) == 0.0);
  CHECK(mted(b, b) == 0.0);
}

TEST_CASE("mted equals the constrained-mapping oracle on random trees") {
  std::mt19937 rng(42);
  for (int iter = 0; iter < 40; ++iter) {
    const auto a = mtltest::random_tree_context(rng, static_cast<int>(rng() % 4));
    const auto b = mtltest::random_tree_context(rng, static_cast<int>(rng() % 4));
    const double got = mted(a, b);
    const double want = mtltest::mted_bruteforce(a, b);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("mted metric properties on random trees") {
  std::mt19937 rng(43);
  for (int iter = 0; iter < 30; ++iter) {
    const auto x = mtltest::random_tree_context(rng, 1 + static_cast<int>(rng() % 4));
    const auto y = mtltest::random_tree_context(rng, 1 + static_cast<int>(rng() % 4));
    const auto z = mtltest::random_tree_context(rng, 1 + static_cast<int>(rng() % 4));
    CHECK(mted(x, x) == 0.0);
    CHECK(mted(x, y) == mted(y, x));
    CHECK(mted(x, z) <= mted(x, y) + mted(y, z) + 1e-9);
    CHECK(mted(x, y) >= 0.0);
  }
}

TEST_CASE("mted scales linearly with the field") {
  std::mt19937 rng(44);
  for (int iter = 0; iter < 10; ++iter) {
    auto ga = mtltest::random_field(rng, {8});
    auto gb = mtltest::random_field(rng, {8});
    const double d = mted(mtltest::context_of(ga), mtltest::context_of(gb));
    for (auto& v : ga.values) v *= 2.0;
    for (auto& v : gb.values) v *= 2.0;
    const double d2 = mted(mtltest::context_of(ga), mtltest::context_of(gb));
    CHECK(d2 == 2.0 * d);  // doubling is exact in binary floating point
  }
}

TEST_CASE("edit trace records the winning branches") {
  const auto a = mtltest::context_of(mtltest::grid1d({0, 5, 1, 3}));
  EditTrace trace;
  CHECK(mted(a, a, &trace) == 0.0);
  REQUIRE(trace.n1 == 4);
  REQUIRE(trace.n2 == 4);
  const auto& root_cell = trace.cells[static_cast<std::size_t>(3 * 4 + 3)];
  CHECK(root_cell.tree_branch == 0);  // relabel on the diagonal
  CHECK(root_cell.forest_branch == 0);
  // square assignment over children + slots: child matches child, slot slot
  CHECK(root_cell.matching == (std::vector<int>{0, 1}));
}
