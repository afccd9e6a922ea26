#include "mtlocal/analysis.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <unordered_map>

#include "mtlocal/errors.hpp"

namespace mtl {

namespace {

struct DisjointSet {
  std::vector<std::int64_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::int64_t find(std::int64_t x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(std::int64_t a, std::int64_t b) {
    parent[static_cast<std::size_t>(find(a))] = find(b);
  }
};

}  // namespace

std::vector<std::vector<NodeId>> symmetry_groups(const DistanceMatrix& self_dm, double tau) {
  if (tau < 0.0) throw ConfigError("symmetry threshold must be >= 0");
  if (self_dm.row_roots != self_dm.col_roots)
    throw ValidationError("symmetry grouping needs a self-comparison matrix");
  const std::int64_t n = self_dm.cols();
  DisjointSet ds(static_cast<std::size_t>(n));
  for (std::int64_t r = 0; r < n; ++r)
    for (std::int64_t c = 0; c < n; ++c)
      if (self_dm.present[self_dm.at(r, c)] && self_dm.value[self_dm.at(r, c)] <= tau)
        ds.unite(r, c);

  // Components keyed by first-appearing member, members in refinement order.
  std::unordered_map<std::int64_t, std::vector<std::int64_t>> comp;
  std::vector<std::int64_t> order;
  for (std::int64_t p = 0; p < n; ++p) {
    const std::int64_t rep = ds.find(p);
    auto& members = comp[rep];
    if (members.empty()) order.push_back(rep);
    members.push_back(p);
  }
  std::vector<std::vector<NodeId>> groups;
  for (auto rep : order) {
    const auto& members = comp[rep];
    if (members.size() < 2) continue;
    std::vector<NodeId> g;
    g.reserve(members.size());
    for (auto p : members) g.push_back(self_dm.col_roots[static_cast<std::size_t>(p)]);
    groups.push_back(std::move(g));
  }
  return groups;
}

double overlap(const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t ia = 0, ib = 0, common = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] < b[ib]) {
      ++ia;
    } else if (b[ib] < a[ia]) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

namespace {

// Track-node rule: a subtree appears in the graph when the per-timestep
// self refinement retains at least one pair involving it, i.e. it has a
// comparable non-nested peer in its own tree.
std::vector<NodeId> track_nodes(const TreeContext& ctx, const RefinementConfig& cfg) {
  RefinementConfig self_cfg = cfg;
  self_cfg.self_mode = true;
  const ResolvedThresholds thr = resolve_thresholds(ctx, ctx, self_cfg);
  const std::vector<std::uint8_t> mask = prune_pairs(ctx, ctx, self_cfg, thr);
  const std::size_t n = ctx.tree.nodes.size();
  std::vector<char> hit(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (mask[i * n + j]) {
        hit[i] = 1;
        hit[j] = 1;
      }
  std::vector<NodeId> out;
  for (NodeId r : order_subtrees(ctx))
    if (hit[static_cast<std::size_t>(r)]) out.push_back(r);
  return out;
}

}  // namespace

TrackGraph build_track_graph(const std::vector<const TreeContext*>& steps,
                             const std::vector<DistanceMatrix>& dms, double overlap_min,
                             const RefinementConfig& cfg) {
  if (steps.empty()) throw ValidationError("track graph needs at least one timestep");
  if (dms.size() + 1 != steps.size())
    throw ValidationError("track graph needs one distance matrix per consecutive pair");
  for (const auto* s : steps)
    if (s->seg.arc_of.size() != steps[0]->seg.arc_of.size())
      throw ValidationError("timesteps cover differently sized grids");

  TrackGraph g;
  std::vector<std::vector<std::int64_t>> node_index_at;  // timestep -> node ids -> g index
  std::vector<std::vector<std::vector<VertexId>>> regions(steps.size());
  node_index_at.resize(steps.size());
  for (std::size_t t = 0; t < steps.size(); ++t) {
    node_index_at[t].assign(steps[t]->tree.nodes.size(), -1);
    for (NodeId root : track_nodes(*steps[t], cfg)) {
      node_index_at[t][static_cast<std::size_t>(root)] =
          static_cast<std::int64_t>(g.nodes.size());
      g.nodes.push_back({static_cast<std::int64_t>(t), root,
                         steps[t]->stats[static_cast<std::size_t>(root)].volume});
      regions[t].push_back(region_vertices(*steps[t], root));
    }
  }

  std::vector<std::int64_t> first_at(steps.size(), 0);
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    const auto t = static_cast<std::size_t>(g.nodes[k].timestep);
    if (k == 0 || g.nodes[k - 1].timestep != g.nodes[k].timestep)
      first_at[t] = static_cast<std::int64_t>(k);
  }

  for (std::size_t t = 0; t + 1 < steps.size(); ++t) {
    const DistanceMatrix& dm = dms[t];
    // Positions of subtree roots inside the cross matrix.
    std::unordered_map<NodeId, std::int64_t> col_pos, row_pos;
    for (std::int64_t c = 0; c < dm.cols(); ++c) col_pos[dm.col_roots[static_cast<std::size_t>(c)]] = c;
    for (std::int64_t r = 0; r < dm.rows(); ++r) row_pos[dm.row_roots[static_cast<std::size_t>(r)]] = r;
    for (std::size_t ka = 0; ka < g.nodes.size(); ++ka) {
      if (g.nodes[ka].timestep != static_cast<std::int64_t>(t)) continue;
      const auto ca = col_pos.find(g.nodes[ka].root);
      if (ca == col_pos.end()) continue;
      const auto& region_a =
          regions[t][static_cast<std::size_t>(static_cast<std::int64_t>(ka) - first_at[t])];
      for (std::size_t kb = 0; kb < g.nodes.size(); ++kb) {
        if (g.nodes[kb].timestep != static_cast<std::int64_t>(t) + 1) continue;
        const auto rb = row_pos.find(g.nodes[kb].root);
        if (rb == row_pos.end()) continue;
        if (!dm.present[dm.at(rb->second, ca->second)]) continue;
        const auto& region_b =
            regions[t + 1]
                   [static_cast<std::size_t>(static_cast<std::int64_t>(kb) - first_at[t + 1])];
        const double w = overlap(region_a, region_b);
        if (w <= 0.0 || w < overlap_min) continue;
        g.edges.push_back({static_cast<std::int64_t>(ka), static_cast<std::int64_t>(kb), w});
      }
    }
  }
  return g;
}

namespace {

struct PathScore {
  double weight = 0.0;
  std::int64_t length = 1;
};

bool better(const PathScore& x, const PathScore& y, TrackOrder order) {
  if (order == TrackOrder::weight) {
    if (x.weight != y.weight) return x.weight > y.weight;
    return x.length > y.length;
  }
  if (x.length != y.length) return x.length > y.length;
  return x.weight > y.weight;
}

Track extract_best(const TrackGraph& g, const std::vector<char>& alive, TrackOrder order) {
  const std::size_t n = g.nodes.size();
  std::vector<PathScore> score(n);
  std::vector<std::int64_t> pred(n, -1);
  // Nodes are already sorted by timestep, so index order is topological.
  for (const auto& e : g.edges) {
    if (!alive[static_cast<std::size_t>(e.from)] || !alive[static_cast<std::size_t>(e.to)])
      continue;
    PathScore cand{score[static_cast<std::size_t>(e.from)].weight + e.weight,
                   score[static_cast<std::size_t>(e.from)].length + 1};
    if (better(cand, score[static_cast<std::size_t>(e.to)], order))
      score[static_cast<std::size_t>(e.to)] = cand, pred[static_cast<std::size_t>(e.to)] = e.from;
  }
  std::int64_t end = -1;
  for (std::size_t k = 0; k < n; ++k) {
    if (!alive[k]) continue;
    if (end < 0 || better(score[k], score[static_cast<std::size_t>(end)], order))
      end = static_cast<std::int64_t>(k);
  }
  Track track;
  if (end < 0) return track;
  track.weight = score[static_cast<std::size_t>(end)].weight;
  for (std::int64_t k = end; k >= 0; k = pred[static_cast<std::size_t>(k)])
    track.nodes.push_back(k);
  std::reverse(track.nodes.begin(), track.nodes.end());
  return track;
}

}  // namespace

std::vector<Track> top_tracks(const TrackGraph& g, TrackOrder order, std::int64_t min_len,
                              double min_weight, std::int64_t k) {
  std::vector<Track> out;
  std::vector<char> alive(g.nodes.size(), 1);
  while (k <= 0 || static_cast<std::int64_t>(out.size()) < k) {
    Track best = extract_best(g, alive, order);
    if (best.nodes.empty()) break;
    if (best.length() < min_len || best.weight < min_weight) break;
    for (auto n : best.nodes) alive[static_cast<std::size_t>(n)] = 0;
    out.push_back(std::move(best));
  }
  return out;
}

namespace {

// Edges sorted for greedy extension are scanned in insertion order; ties on
// weight keep the first (lowest target index by construction).
std::int64_t best_step(const TrackGraph& g, std::int64_t node, bool forward, double* w) {
  std::int64_t pick = -1;
  double best = 0.0;
  for (const auto& e : g.edges) {
    const std::int64_t from = forward ? e.from : e.to;
    const std::int64_t to = forward ? e.to : e.from;
    if (from != node) continue;
    if (pick < 0 || e.weight > best) {
      pick = to;
      best = e.weight;
    }
  }
  if (pick >= 0) *w += best;
  return pick;
}

}  // namespace

std::vector<Track> query_track(const TrackGraph& g, const DistanceMatrix& self_dm_at_t,
                               std::int64_t timestep, NodeId query_root, double tau_sym) {
  std::int64_t query_idx = -1;
  for (std::size_t k = 0; k < g.nodes.size(); ++k)
    if (g.nodes[k].timestep == timestep && g.nodes[k].root == query_root)
      query_idx = static_cast<std::int64_t>(k);
  if (query_idx < 0) throw ValidationError("query subtree is not a track-graph node");

  std::vector<NodeId> members{query_root};
  for (const auto& group : symmetry_groups(self_dm_at_t, tau_sym))
    if (std::find(group.begin(), group.end(), query_root) != group.end()) {
      members = group;
      break;
    }

  std::vector<Track> out;
  for (NodeId member : members) {
    std::int64_t start = -1;
    for (std::size_t k = 0; k < g.nodes.size(); ++k)
      if (g.nodes[k].timestep == timestep && g.nodes[k].root == member)
        start = static_cast<std::int64_t>(k);
    if (start < 0) continue;
    Track track;
    track.nodes.push_back(start);
    double w = 0.0;
    for (std::int64_t cur = start;;) {
      const std::int64_t nxt = best_step(g, cur, true, &w);
      if (nxt < 0) break;
      track.nodes.push_back(nxt);
      cur = nxt;
    }
    for (std::int64_t cur = start;;) {
      const std::int64_t prv = best_step(g, cur, false, &w);
      if (prv < 0) break;
      track.nodes.insert(track.nodes.begin(), prv);
      cur = prv;
    }
    track.weight = w;
    out.push_back(std::move(track));
  }
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-independent region fingerprints, accumulated bottom-up.
std::vector<std::uint64_t> region_hashes(const TreeContext& ctx) {
  std::vector<std::uint64_t> h(ctx.tree.nodes.size(), 0);
  for (std::size_t v = 0; v < ctx.seg.arc_of.size(); ++v)
    h[static_cast<std::size_t>(ctx.seg.arc_of[v])] += splitmix64(static_cast<std::uint64_t>(v));
  for (NodeId n : ctx.postorder)
    for (auto c : ctx.tree.node(n).children)
      h[static_cast<std::size_t>(n)] += h[static_cast<std::size_t>(c)];
  return h;
}

}  // namespace

std::vector<RegionMatch> region_compare(const TreeContext& a, const TreeContext& b) {
  if (a.seg.arc_of.size() != b.seg.arc_of.size())
    throw ValidationError("region comparison needs fields over the same grid");

  const std::vector<std::uint64_t> ha = region_hashes(a);
  const std::vector<std::uint64_t> hb = region_hashes(b);
  std::unordered_map<std::uint64_t, std::vector<NodeId>> by_hash;
  for (std::size_t j = 0; j < hb.size(); ++j)
    by_hash[hb[j]].push_back(static_cast<NodeId>(j));

  std::vector<RegionMatch> out;
  const DualTables tables = compute_all_tables(a, b);
  for (std::size_t i = 0; i < ha.size(); ++i) {
    const auto it = by_hash.find(ha[i]);
    if (it == by_hash.end()) continue;
    const NodeId ra = static_cast<NodeId>(i);
    std::vector<VertexId> va;  // deferred until a candidate survives the volume check
    for (NodeId rb : it->second) {
      if (a.stats[i].volume != b.stats[static_cast<std::size_t>(rb)].volume) continue;
      if (va.empty()) va = region_vertices(a, ra);
      if (va != region_vertices(b, rb)) continue;
      out.push_back({ra, rb, a.stats[i].volume, lmted_from_tables(tables, a, b, ra, rb)});
    }
  }
  std::sort(out.begin(), out.end(), [](const RegionMatch& x, const RegionMatch& y) {
    if (x.volume != y.volume) return x.volume > y.volume;
    if (x.root_a != y.root_a) return x.root_a < y.root_a;
    return x.root_b < y.root_b;
  });
  return out;
}

}  // namespace mtl
