#include "mtlocal/edit_distance.hpp"

#include <algorithm>
#include <limits>

#include "mtlocal/cost_model.hpp"
#include "tables_impl.hpp"

namespace mtl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

AssignmentResult min_cost_matching(const std::vector<double>& cost, int n) {
  AssignmentResult res;
  if (n == 0) return res;
  // Shortest augmenting paths with potentials; ties resolved toward the
  // lowest column index by the strict comparisons.
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> minv(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost[static_cast<std::size_t>((i0 - 1) * n + (j - 1))] -
                           u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  res.assignment.assign(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] > 0)
      res.assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  // Summed in row order of the solved matrix for reproducibility.
  for (int i = 0; i < n; ++i)
    res.cost += cost[static_cast<std::size_t>(i * n + res.assignment[static_cast<std::size_t>(i)])];
  return res;
}

namespace detail {

double ForestMatching::solve(std::vector<int>* assignment) const {
  const int m = ni + nj;
  if (m == 0) {
    if (assignment) assignment->clear();
    return 0.0;
  }
  auto entry = [&](int r, int c) -> double {
    if (r < ni && c < nj) return real[static_cast<std::size_t>(r * nj + c)];
    if (r < ni) return del[static_cast<std::size_t>(r)];
    if (c < nj) return ins[static_cast<std::size_t>(c)];
    return 0.0;
  };
  std::vector<double> mat(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
  std::vector<double> tr(mat.size());
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      const double x = entry(r, c);
      mat[static_cast<std::size_t>(r * m + c)] = x;
      tr[static_cast<std::size_t>(c * m + r)] = x;
    }
  const bool transposed = std::lexicographical_compare(tr.begin(), tr.end(), mat.begin(), mat.end());
  const AssignmentResult sol = min_cost_matching(transposed ? tr : mat, m);
  if (assignment) {
    assignment->assign(static_cast<std::size_t>(m), -1);
    for (int r = 0; r < m; ++r) {
      const int c = sol.assignment[static_cast<std::size_t>(r)];
      if (transposed)
        (*assignment)[static_cast<std::size_t>(c)] = r;
      else
        (*assignment)[static_cast<std::size_t>(r)] = c;
    }
  }
  return sol.cost;
}

void fill_dc(const TreeContext& a, const TreeContext& b,
             const std::vector<NodeId>& post1, const std::vector<NodeId>& post2,
             DcTables& dc, EditTrace* trace) {
  for (NodeId i : post1) {
    const auto ii = static_cast<std::size_t>(i);
    double fsum = 0.0;
    for (auto c : a.tree.node(i).children) fsum += dc.tree1_empty[static_cast<std::size_t>(c)];
    dc.forest1_empty[ii] = fsum;
    dc.tree1_empty[ii] = fsum + delete_cost(node_point(a.pairing, i));
  }
  for (NodeId j : post2) {
    const auto jj = static_cast<std::size_t>(j);
    double fsum = 0.0;
    for (auto c : b.tree.node(j).children) fsum += dc.empty_tree2[static_cast<std::size_t>(c)];
    dc.empty_forest2[jj] = fsum;
    dc.empty_tree2[jj] = fsum + insert_cost(node_point(b.pairing, j));
  }

  std::vector<int> match_buf;
  for (NodeId i : post1) {
    const auto& ci = a.tree.node(i).children;
    const PersistencePoint pi = node_point(a.pairing, i);
    for (NodeId j : post2) {
      const auto& cj = b.tree.node(j).children;
      EditTraceCell* cell =
          trace ? &trace->cells[static_cast<std::size_t>(i * trace->n2 + j)] : nullptr;

      ForestMatching fm;
      fm.ni = static_cast<int>(ci.size());
      fm.nj = static_cast<int>(cj.size());
      fm.real.resize(static_cast<std::size_t>(fm.ni) * static_cast<std::size_t>(fm.nj));
      fm.del.resize(static_cast<std::size_t>(fm.ni));
      fm.ins.resize(static_cast<std::size_t>(fm.nj));
      for (int s = 0; s < fm.ni; ++s) {
        fm.del[static_cast<std::size_t>(s)] =
            dc.tree1_empty[static_cast<std::size_t>(ci[static_cast<std::size_t>(s)])];
        for (int t = 0; t < fm.nj; ++t)
          fm.real[static_cast<std::size_t>(s * fm.nj + t)] =
              dc.t(ci[static_cast<std::size_t>(s)], cj[static_cast<std::size_t>(t)]);
      }
      for (int t = 0; t < fm.nj; ++t)
        fm.ins[static_cast<std::size_t>(t)] =
            dc.empty_tree2[static_cast<std::size_t>(cj[static_cast<std::size_t>(t)])];

      double fbest = fm.solve(cell ? &match_buf : nullptr);
      int fbranch = 0;
      for (auto t : cj) {
        const double cand = dc.empty_forest2[static_cast<std::size_t>(j)] + dc.f(i, t) -
                            dc.empty_forest2[static_cast<std::size_t>(t)];
        if (cand < fbest) {
          fbest = cand;
          fbranch = 1;
        }
      }
      for (auto s : ci) {
        const double cand = dc.forest1_empty[static_cast<std::size_t>(i)] + dc.f(s, j) -
                            dc.forest1_empty[static_cast<std::size_t>(s)];
        if (cand < fbest) {
          fbest = cand;
          fbranch = 2;
        }
      }
      dc.f(i, j) = std::max(0.0, fbest);

      double tbest = dc.f(i, j) + relabel_cost(pi, node_point(b.pairing, j));
      int tbranch = 0;
      for (auto t : cj) {
        const double cand = dc.empty_tree2[static_cast<std::size_t>(j)] + dc.t(i, t) -
                            dc.empty_tree2[static_cast<std::size_t>(t)];
        if (cand < tbest) {
          tbest = cand;
          tbranch = 1;
        }
      }
      for (auto s : ci) {
        const double cand = dc.tree1_empty[static_cast<std::size_t>(i)] + dc.t(s, j) -
                            dc.tree1_empty[static_cast<std::size_t>(s)];
        if (cand < tbest) {
          tbest = cand;
          tbranch = 2;
        }
      }
      dc.t(i, j) = std::max(0.0, tbest);

      if (cell) {
        cell->tree_branch = tbranch;
        cell->forest_branch = fbranch;
        cell->matching = fbranch == 0 ? match_buf : std::vector<int>{};
      }
    }
  }
}

}  // namespace detail

DcTables compute_dc_tables(const TreeContext& a, const TreeContext& b, EditTrace* trace) {
  DcTables dc;
  dc.n1 = a.tree.node_count();
  dc.n2 = b.tree.node_count();
  const auto cells = static_cast<std::size_t>(dc.n1) * static_cast<std::size_t>(dc.n2);
  dc.tree.assign(cells, 0.0);
  dc.forest.assign(cells, 0.0);
  dc.tree1_empty.assign(static_cast<std::size_t>(dc.n1), 0.0);
  dc.forest1_empty.assign(static_cast<std::size_t>(dc.n1), 0.0);
  dc.empty_tree2.assign(static_cast<std::size_t>(dc.n2), 0.0);
  dc.empty_forest2.assign(static_cast<std::size_t>(dc.n2), 0.0);
  if (trace) {
    trace->n1 = dc.n1;
    trace->n2 = dc.n2;
    trace->cells.assign(cells, EditTraceCell{});
  }
  detail::fill_dc(a, b, a.postorder, b.postorder, dc, trace);
  return dc;
}

double mted(const TreeContext& a, const TreeContext& b, EditTrace* trace) {
  const DcTables dc = compute_dc_tables(a, b, trace);
  return dc.t(a.tree.root, b.tree.root);
}

}  // namespace mtl
