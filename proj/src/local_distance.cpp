#include "mtlocal/local_distance.hpp"

#include <algorithm>

#include "mtlocal/cost_model.hpp"
#include "mtlocal/errors.hpp"
#include "tables_impl.hpp"

namespace mtl {

namespace detail {

void fill_dp(const TreeContext& a, const TreeContext& b,
             const std::vector<NodeId>& post1, const std::vector<NodeId>& post2,
             const DcTables& dc, DpTables& dp) {
  // gamma' of a node against the gap: free for the cell's unpaired survivor.
  auto del_p = [&](NodeId i) {
    return i == a.unpaired[static_cast<std::size_t>(i)]
               ? 0.0
               : delete_cost(node_point(a.pairing, i));
  };
  auto ins_p = [&](NodeId j) {
    return j == b.unpaired[static_cast<std::size_t>(j)]
               ? 0.0
               : insert_cost(node_point(b.pairing, j));
  };

  for (NodeId i : post1) {
    const auto ii = static_cast<std::size_t>(i);
    const NodeId u = a.upath_child[ii];
    double fsum = 0.0;
    for (auto c : a.tree.node(i).children)
      fsum += c == u ? dp.tree1_empty[static_cast<std::size_t>(c)]
                     : dc.tree1_empty[static_cast<std::size_t>(c)];
    dp.forest1_empty[ii] = fsum;
    dp.tree1_empty[ii] = fsum + del_p(i);
  }
  for (NodeId j : post2) {
    const auto jj = static_cast<std::size_t>(j);
    const NodeId u = b.upath_child[jj];
    double fsum = 0.0;
    for (auto c : b.tree.node(j).children)
      fsum += c == u ? dp.empty_tree2[static_cast<std::size_t>(c)]
                     : dc.empty_tree2[static_cast<std::size_t>(c)];
    dp.empty_forest2[jj] = fsum;
    dp.empty_tree2[jj] = fsum + ins_p(j);
  }

  for (NodeId i : post1) {
    const auto ii = static_cast<std::size_t>(i);
    const auto& ci = a.tree.node(i).children;
    const NodeId ui = a.upath_child[ii];
    const PersistencePoint pi = node_point(a.pairing, i);
    const bool i_unpaired = i == a.unpaired[ii];
    for (NodeId j : post2) {
      const auto jj = static_cast<std::size_t>(j);
      const auto& cj = b.tree.node(j).children;
      const NodeId uj = b.upath_child[jj];

      // Forest cell. Matching edges touching both unpaired-path children use
      // the truncated table; every other edge keeps full costs.
      ForestMatching fm;
      fm.ni = static_cast<int>(ci.size());
      fm.nj = static_cast<int>(cj.size());
      fm.real.resize(static_cast<std::size_t>(fm.ni) * static_cast<std::size_t>(fm.nj));
      fm.del.resize(static_cast<std::size_t>(fm.ni));
      fm.ins.resize(static_cast<std::size_t>(fm.nj));
      for (int s = 0; s < fm.ni; ++s) {
        const NodeId cs = ci[static_cast<std::size_t>(s)];
        fm.del[static_cast<std::size_t>(s)] = cs == ui
                                                  ? dp.tree1_empty[static_cast<std::size_t>(cs)]
                                                  : dc.tree1_empty[static_cast<std::size_t>(cs)];
        for (int t = 0; t < fm.nj; ++t) {
          const NodeId ct = cj[static_cast<std::size_t>(t)];
          fm.real[static_cast<std::size_t>(s * fm.nj + t)] =
              (cs == ui && ct == uj) ? dp.t(cs, ct) : dc.t(cs, ct);
        }
      }
      for (int t = 0; t < fm.nj; ++t) {
        const NodeId ct = cj[static_cast<std::size_t>(t)];
        fm.ins[static_cast<std::size_t>(t)] = ct == uj
                                                  ? dp.empty_tree2[static_cast<std::size_t>(ct)]
                                                  : dc.empty_tree2[static_cast<std::size_t>(ct)];
      }
      double fbest = fm.solve();
      for (auto t : cj) {
        const auto tt = static_cast<std::size_t>(t);
        const double sub = t == uj ? dp.f(i, t) - dp.empty_forest2[tt]
                                   : dc.f(i, t) - dc.empty_forest2[tt];
        fbest = std::min(fbest, dp.empty_forest2[jj] + sub);
      }
      for (auto s : ci) {
        const auto ss = static_cast<std::size_t>(s);
        const double sub = s == ui ? dp.f(s, j) - dp.forest1_empty[ss]
                                   : dc.f(s, j) - dc.forest1_empty[ss];
        fbest = std::min(fbest, dp.forest1_empty[ii] + sub);
      }
      dp.f(i, j) = std::max(0.0, fbest);

      // Tree cell.
      const PersistencePoint pj = node_point(b.pairing, j);
      double tbest =
          dp.f(i, j) + truncated_cost(&pi, i_unpaired, &pj, j == b.unpaired[jj]);
      for (auto t : cj) {
        const auto tt = static_cast<std::size_t>(t);
        const double sub =
            t == uj ? dp.t(i, t) - dp.empty_tree2[tt] : dc.t(i, t) - dc.empty_tree2[tt];
        tbest = std::min(tbest, dp.empty_tree2[jj] + sub);
      }
      for (auto s : ci) {
        const auto ss = static_cast<std::size_t>(s);
        const double sub =
            s == ui ? dp.t(s, j) - dp.tree1_empty[ss] : dc.t(s, j) - dc.tree1_empty[ss];
        tbest = std::min(tbest, dp.tree1_empty[ii] + sub);
      }
      dp.t(i, j) = std::max(0.0, tbest);
    }
  }
}

}  // namespace detail

namespace {

DpTables make_dp_shell(std::int64_t n1, std::int64_t n2) {
  DpTables dp;
  dp.n1 = n1;
  dp.n2 = n2;
  const auto cells = static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2);
  dp.tree.assign(cells, 0.0);
  dp.forest.assign(cells, 0.0);
  dp.tree1_empty.assign(static_cast<std::size_t>(n1), 0.0);
  dp.forest1_empty.assign(static_cast<std::size_t>(n1), 0.0);
  dp.empty_tree2.assign(static_cast<std::size_t>(n2), 0.0);
  dp.empty_forest2.assign(static_cast<std::size_t>(n2), 0.0);
  return dp;
}

}  // namespace

DualTables compute_all_tables(const TreeContext& a, const TreeContext& b) {
  DualTables tables;
  tables.dc = compute_dc_tables(a, b);
  tables.dp = make_dp_shell(tables.dc.n1, tables.dc.n2);
  detail::fill_dp(a, b, a.postorder, b.postorder, tables.dc, tables.dp);
  return tables;
}

double lmted_from_tables(const DualTables& tables, const TreeContext& a,
                         const TreeContext& b, NodeId i, NodeId j) {
  const TruncatedContext ta = subtree_truncation(a, i);
  const TruncatedContext tb = subtree_truncation(b, j);
  return tables.dp.t(i, j) + gamma_cap(&ta, &tb);
}

double lmted_pair(const TreeContext& a, NodeId i, const TreeContext& b, NodeId j) {
  std::vector<NodeId> post1 = subtree_nodes(a.tree, i);
  std::vector<NodeId> post2 = subtree_nodes(b.tree, j);
  std::reverse(post1.begin(), post1.end());  // preorder reversed is children-first
  std::reverse(post2.begin(), post2.end());

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
  detail::fill_dc(a, b, post1, post2, dc, nullptr);

  DpTables dp = make_dp_shell(dc.n1, dc.n2);
  detail::fill_dp(a, b, post1, post2, dc, dp);

  const TruncatedContext ta = subtree_truncation(a, i);
  const TruncatedContext tb = subtree_truncation(b, j);
  return dp.t(i, j) + gamma_cap(&ta, &tb);
}

DistanceMatrix lmted_all_pairs(const TreeContext& a, const TreeContext& b,
                               const RefinementConfig& cfg) {
  validate_config(cfg);
  DistanceMatrix dm;
  dm.config = cfg;
  dm.thresholds = resolve_thresholds(a, b, cfg);
  dm.col_roots = order_subtrees(a);
  dm.row_roots = order_subtrees(b);
  dm.source_a = a.source;
  dm.source_b = b.source;
  dm.normalized_a = a.normalized;
  dm.normalized_b = b.normalized;
  dm.self_comparison = cfg.self_mode;

  const std::vector<std::uint8_t> mask = prune_pairs(a, b, cfg, dm.thresholds);
  const DualTables tables = compute_all_tables(a, b);

  const std::int64_t nb = b.tree.node_count();
  dm.value.assign(static_cast<std::size_t>(dm.rows() * dm.cols()), 0.0);
  dm.present.assign(dm.value.size(), 0);
  for (std::int64_t r = 0; r < dm.rows(); ++r) {
    const NodeId jb = dm.row_roots[static_cast<std::size_t>(r)];
    for (std::int64_t c = 0; c < dm.cols(); ++c) {
      const NodeId ia = dm.col_roots[static_cast<std::size_t>(c)];
      if (!mask[static_cast<std::size_t>(ia * nb + jb)]) continue;
      dm.present[dm.at(r, c)] = 1;
      dm.value[dm.at(r, c)] = lmted_from_tables(tables, a, b, ia, jb);
    }
  }
  return dm;
}

}  // namespace mtl
