#include "mtlocal/refinement.hpp"

#include <algorithm>
#include <cmath>

#include "mtlocal/errors.hpp"

namespace mtl {

void validate_config(const RefinementConfig& cfg) {
  for (double r : {cfg.node_ratio, cfg.volume_ratio, cfg.pers_ratio})
    if (!(r >= 0.0 && r <= 1.0) || std::isnan(r))
      throw ConfigError("refinement ratios must lie in [0, 1]");
}

std::vector<NodeId> order_subtrees(const TreeContext& ctx) {
  std::vector<NodeId> roots(ctx.tree.nodes.size());
  for (std::size_t k = 0; k < roots.size(); ++k) roots[k] = static_cast<NodeId>(k);
  std::sort(roots.begin(), roots.end(), [&](NodeId x, NodeId y) {
    const auto& sx = ctx.stats[static_cast<std::size_t>(x)];
    const auto& sy = ctx.stats[static_cast<std::size_t>(y)];
    if (sx.size != sy.size) return sx.size > sy.size;
    if (sx.volume != sy.volume) return sx.volume > sy.volume;
    return x > y;
  });
  return roots;
}

double knee_threshold(const std::vector<double>& ratios,
                      const std::vector<std::int64_t>& counts) {
  if (ratios.size() != counts.size() || ratios.size() < 2) return 0.5;
  std::size_t best = 1;
  double best_drop = static_cast<double>(counts[0] - counts[1]);
  double total = 0.0;
  for (std::size_t k = 1; k < counts.size(); ++k) {
    const double drop = static_cast<double>(counts[k - 1] - counts[k]);
    total += drop;
    if (drop > best_drop) {
      best_drop = drop;
      best = k;
    }
  }
  const double mean = total / static_cast<double>(counts.size() - 1);
  return best_drop > 2.0 * mean ? ratios[best] : 0.5;
}

namespace {

double stat_ratio(double x, double y) {
  if (x == 0.0 && y == 0.0) return 1.0;
  const double lo = std::min(x, y), hi = std::max(x, y);
  return lo / hi;
}

bool is_ancestor(const MergeTree& t, NodeId anc, NodeId n) {
  for (NodeId w = t.node(n).parent; w != kNoNode; w = t.node(w).parent)
    if (w == anc) return true;
  return false;
}

// Pair ratios for one criterion; self exclusions applied so knee curves see
// the actual candidate set.
template <typename Stat>
std::vector<double> pair_ratios(const TreeContext& a, const TreeContext& b, bool self_mode,
                                Stat stat) {
  std::vector<double> out;
  const auto na = a.tree.nodes.size(), nb = b.tree.nodes.size();
  out.reserve(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      if (self_mode) {
        const auto ni = static_cast<NodeId>(i), nj = static_cast<NodeId>(j);
        if (ni == nj || is_ancestor(a.tree, ni, nj) || is_ancestor(a.tree, nj, ni)) continue;
      }
      out.push_back(stat_ratio(stat(a.stats[i]), stat(b.stats[j])));
    }
  return out;
}

double knee_for(const std::vector<double>& pr) {
  std::vector<double> ratios;
  std::vector<std::int64_t> counts;
  for (int k = 1; k <= 20; ++k) {
    const double r = static_cast<double>(k) / 20.0;
    ratios.push_back(r);
    counts.push_back(static_cast<std::int64_t>(
        std::count_if(pr.begin(), pr.end(), [&](double x) { return x >= r; })));
  }
  return knee_threshold(ratios, counts);
}

}  // namespace

ResolvedThresholds resolve_thresholds(const TreeContext& a, const TreeContext& b,
                                      const RefinementConfig& cfg) {
  ResolvedThresholds thr{cfg.node_ratio, cfg.volume_ratio, cfg.pers_ratio};
  if (!cfg.use_knee) return thr;
  thr.node_ratio = knee_for(pair_ratios(a, b, cfg.self_mode, [](const SubtreeStats& s) {
    return static_cast<double>(s.size);
  }));
  thr.volume_ratio = knee_for(pair_ratios(a, b, cfg.self_mode, [](const SubtreeStats& s) {
    return static_cast<double>(s.volume);
  }));
  thr.pers_ratio = knee_for(
      pair_ratios(a, b, cfg.self_mode, [](const SubtreeStats& s) { return s.agg_pers; }));
  return thr;
}

std::vector<std::uint8_t> prune_pairs(const TreeContext& a, const TreeContext& b,
                                      const RefinementConfig& cfg,
                                      const ResolvedThresholds& thr) {
  const auto na = a.tree.nodes.size(), nb = b.tree.nodes.size();
  std::vector<std::uint8_t> mask(na * nb, 0);
  for (std::size_t i = 0; i < na; ++i) {
    const auto& si = a.stats[i];
    for (std::size_t j = 0; j < nb; ++j) {
      if (cfg.self_mode) {
        const auto ni = static_cast<NodeId>(i), nj = static_cast<NodeId>(j);
        if (ni == nj || is_ancestor(a.tree, ni, nj) || is_ancestor(a.tree, nj, ni)) continue;
      }
      const auto& sj = b.stats[j];
      if (stat_ratio(static_cast<double>(si.size), static_cast<double>(sj.size)) <
          thr.node_ratio)
        continue;
      if (stat_ratio(static_cast<double>(si.volume), static_cast<double>(sj.volume)) <
          thr.volume_ratio)
        continue;
      if (stat_ratio(si.agg_pers, sj.agg_pers) < thr.pers_ratio) continue;
      mask[i * nb + j] = 1;
    }
  }
  return mask;
}

CanonicalSubtree canonicalize_subtree(const TreeContext& ctx, NodeId root) {
  CanonicalSubtree out;
  if (root == ctx.tree.root) {
    out.tree = ctx.tree;
    out.pairing = ctx.pairing;
    return out;
  }
  out.tree.variant = ctx.tree.variant;
  TreeNode dummy;
  dummy.id = 0;
  dummy.vertex = -1;
  dummy.value = ctx.dummy_value[static_cast<std::size_t>(root)];
  dummy.kind = NodeKind::root;
  out.tree.nodes.push_back(dummy);
  out.tree.root = 0;
  out.dummy_root = 0;

  const std::vector<NodeId> nodes = subtree_nodes(ctx.tree, root);
  std::vector<NodeId> remap(ctx.tree.nodes.size(), kNoNode);
  for (std::size_t k = 0; k < nodes.size(); ++k)
    remap[static_cast<std::size_t>(nodes[k])] = static_cast<NodeId>(k + 1);
  for (NodeId n : nodes) {
    const auto& src = ctx.tree.node(n);
    TreeNode nn;
    nn.id = remap[static_cast<std::size_t>(n)];
    nn.vertex = src.vertex;
    nn.value = src.value;
    nn.kind = src.kind;
    nn.parent = n == root ? 0 : remap[static_cast<std::size_t>(src.parent)];
    for (auto c : src.children) nn.children.push_back(remap[static_cast<std::size_t>(c)]);
    out.tree.nodes.push_back(std::move(nn));
  }
  out.tree.nodes[0].children.push_back(remap[static_cast<std::size_t>(root)]);
  out.pairing = pair_persistence(out.tree);
  return out;
}

}  // namespace mtl
