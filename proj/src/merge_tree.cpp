#include "mtlocal/merge_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtlocal/errors.hpp"

namespace mtl {

namespace {

struct UnionFind {
  std::vector<std::int64_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::int64_t find(std::int64_t x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(std::int64_t a, std::int64_t b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

// Sweep-order comparison: true when a precedes b (elder). Split sweeps
// descending, join ascending; ties by ascending vertex index.
bool precedes(TreeVariant variant, double fa, VertexId va, double fb, VertexId vb) {
  if (fa != fb) return variant == TreeVariant::split ? fa > fb : fa < fb;
  return va < vb;
}

}  // namespace

TreeAndSegmentation build_merge_tree(const ScalarGrid& g, TreeVariant variant) {
  validate_grid(g);
  const TotalOrder order =
      total_order(g, variant == TreeVariant::split ? Direction::descending : Direction::ascending);
  const std::int64_t n = g.size();

  MergeTree t;
  t.variant = variant;
  Segmentation seg;
  seg.arc_of.assign(static_cast<std::size_t>(n), kNoNode);

  UnionFind uf(static_cast<std::size_t>(n));
  std::vector<NodeId> comp_node(static_cast<std::size_t>(n), kNoNode);  // per uf rep
  std::vector<char> swept(static_cast<std::size_t>(n), 0);

  auto add_node = [&](VertexId v, NodeKind kind) -> NodeId {
    TreeNode node;
    node.id = t.node_count();
    node.vertex = v;
    node.value = g.values[static_cast<std::size_t>(v)];
    node.kind = kind;
    t.nodes.push_back(std::move(node));
    return t.nodes.back().id;
  };
  auto adopt = [&](NodeId parent, NodeId child) {
    t.nodes[static_cast<std::size_t>(parent)].children.push_back(child);
    t.nodes[static_cast<std::size_t>(child)].parent = parent;
  };

  VertexId nbr[14];
  std::vector<std::int64_t> reps;
  for (std::int64_t k = 0; k < n; ++k) {
    const VertexId v = order.perm[static_cast<std::size_t>(k)];
    reps.clear();
    const int cnt = freudenthal_neighbors(g, v, nbr);
    for (int a = 0; a < cnt; ++a) {
      if (!swept[static_cast<std::size_t>(nbr[a])]) continue;
      const std::int64_t r = uf.find(nbr[a]);
      if (std::find(reps.begin(), reps.end(), r) == reps.end()) reps.push_back(r);
    }

    if (reps.empty()) {
      const NodeId leaf = add_node(v, NodeKind::leaf);
      comp_node[static_cast<std::size_t>(uf.find(v))] = leaf;
      seg.arc_of[static_cast<std::size_t>(v)] = leaf;
    } else if (reps.size() == 1) {
      uf.unite(v, reps[0]);
      const NodeId top = comp_node[static_cast<std::size_t>(uf.find(v))];
      seg.arc_of[static_cast<std::size_t>(v)] = top;
    } else {
      // Merge event: fold the components into a chain of binary saddles at
      // f(v), taking child tops in ascending order of their creation vertex.
      std::vector<NodeId> tops;
      tops.reserve(reps.size());
      for (auto r : reps) tops.push_back(comp_node[static_cast<std::size_t>(r)]);
      std::sort(tops.begin(), tops.end(), [&](NodeId a, NodeId b) {
        return t.node(a).vertex < t.node(b).vertex;
      });
      NodeId acc = tops[0];
      for (std::size_t a = 1; a < tops.size(); ++a) {
        const NodeId s = add_node(v, NodeKind::saddle);
        adopt(s, acc);
        adopt(s, tops[a]);
        acc = s;
      }
      for (auto r : reps) uf.unite(r, v);
      comp_node[static_cast<std::size_t>(uf.find(v))] = acc;
      seg.arc_of[static_cast<std::size_t>(v)] = acc;
    }

    swept[static_cast<std::size_t>(v)] = 1;

    if (k == n - 1) {
      const NodeId top = comp_node[static_cast<std::size_t>(uf.find(v))];
      if (t.node(top).vertex == v && t.node(top).kind == NodeKind::leaf && n == 1) {
        // Single-vertex field: the lone node doubles as the root.
        t.nodes[static_cast<std::size_t>(top)].kind = NodeKind::root;
        t.root = top;
      } else {
        const NodeId root = add_node(v, NodeKind::root);
        adopt(root, top);
        comp_node[static_cast<std::size_t>(uf.find(v))] = root;
        seg.arc_of[static_cast<std::size_t>(v)] = root;
        t.root = root;
      }
    }
  }

  // Canonical child order everywhere: ascending creation vertex.
  for (auto& node : t.nodes)
    std::sort(node.children.begin(), node.children.end(),
              [&](NodeId a, NodeId b) { return t.node(a).vertex < t.node(b).vertex; });

  seg.arc_count.assign(t.nodes.size(), 0);
  for (auto a : seg.arc_of) ++seg.arc_count[static_cast<std::size_t>(a)];
  return {std::move(t), std::move(seg)};
}

std::vector<NodeId> subtree_nodes(const MergeTree& t, NodeId root) {
  std::vector<NodeId> out, stack{root};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    out.push_back(n);
    const auto& ch = t.node(n).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

namespace {

// Children-first order over the whole tree.
std::vector<NodeId> tree_postorder(const MergeTree& t) {
  std::vector<NodeId> out;
  out.reserve(t.nodes.size());
  std::vector<std::pair<NodeId, std::size_t>> stack{{t.root, 0}};
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    const auto& ch = t.node(n).children;
    if (next < ch.size()) {
      ++next;
      stack.emplace_back(ch[next - 1], 0);
    } else {
      out.push_back(n);
      stack.pop_back();
    }
  }
  return out;
}

// Elder survivor per node: at a saddle, the child survivor that did not pair
// there keeps climbing; at the root, the global extremum.
std::vector<NodeId> survivors(const MergeTree& t, const PersistencePairing& p) {
  std::vector<NodeId> surv(t.nodes.size(), kNoNode);
  for (NodeId n : tree_postorder(t)) {
    const auto& node = t.node(n);
    if (node.children.empty()) {
      surv[static_cast<std::size_t>(n)] = n;
    } else if (node.children.size() == 1) {
      surv[static_cast<std::size_t>(n)] = surv[static_cast<std::size_t>(node.children[0])];
    } else {
      NodeId keep = kNoNode;
      for (auto c : node.children) {
        const NodeId s = surv[static_cast<std::size_t>(c)];
        if (p.partner[static_cast<std::size_t>(s)] != n) keep = s;
      }
      surv[static_cast<std::size_t>(n)] = keep;
    }
  }
  return surv;
}

}  // namespace

PersistencePairing pair_persistence(const MergeTree& t) {
  PersistencePairing p;
  const std::size_t m = t.nodes.size();
  p.partner.assign(m, kNoNode);
  p.birth.assign(m, 0.0);
  p.death.assign(m, 0.0);
  p.pers.assign(m, 0.0);

  auto record = [&](NodeId a, NodeId b) {
    const double fa = t.node(a).value, fb = t.node(b).value;
    const double birth = std::min(fa, fb), death = std::max(fa, fb);
    for (NodeId n : {a, b}) {
      const auto i = static_cast<std::size_t>(n);
      p.partner[i] = (n == a) ? b : a;
      p.birth[i] = birth;
      p.death[i] = death;
      p.pers[i] = death - birth;
    }
  };

  std::vector<NodeId> surv(m, kNoNode);
  for (NodeId n : tree_postorder(t)) {
    const auto& node = t.node(n);
    if (node.children.empty()) {
      surv[static_cast<std::size_t>(n)] = n;
      if (node.kind == NodeKind::root) record(n, n);  // single-vertex field
      continue;
    }
    if (node.kind == NodeKind::root) {
      const NodeId s = surv[static_cast<std::size_t>(node.children[0])];
      record(s, n);
      surv[static_cast<std::size_t>(n)] = s;
      continue;
    }
    // Binary saddle: the younger of the two child survivors dies here.
    const NodeId s0 = surv[static_cast<std::size_t>(node.children[0])];
    const NodeId s1 = surv[static_cast<std::size_t>(node.children[1])];
    const bool first_elder = precedes(t.variant, t.node(s0).value, t.node(s0).vertex,
                                      t.node(s1).value, t.node(s1).vertex);
    const NodeId dies = first_elder ? s1 : s0;
    record(dies, n);
    surv[static_cast<std::size_t>(n)] = first_elder ? s0 : s1;
  }
  return p;
}

NodeId unpaired_leaf(const MergeTree& t, const PersistencePairing& p, NodeId root) {
  NodeId n = root;
  for (;;) {
    const auto& node = t.node(n);
    if (node.children.empty()) return n;
    if (node.children.size() == 1) {
      n = node.children[0];
      continue;
    }
    // Descend into the child whose survivor outlives this saddle: the one
    // whose branch does not house the node paired here.
    const NodeId dead = p.partner[static_cast<std::size_t>(n)];
    // dead lies strictly inside one child branch; walk up from it to find which.
    NodeId walk = dead;
    while (t.node(walk).parent != n) walk = t.node(walk).parent;
    n = node.children[0] == walk ? node.children[1] : node.children[0];
  }
}

SubtreeStats subtree_stats(const MergeTree& t, const Segmentation& seg,
                           const PersistencePairing& p, NodeId root) {
  SubtreeStats st;
  for (NodeId n : subtree_nodes(t, root)) {
    const auto i = static_cast<std::size_t>(n);
    ++st.size;
    st.volume += seg.arc_count[i];
    // A pair contributes where it closes: at its saddle, or at the root.
    const auto kind = t.node(n).kind;
    if (kind == NodeKind::saddle || kind == NodeKind::root) st.agg_pers += p.pers[i];
  }
  return st;
}

SimplifyResult simplify(const MergeTree& t, const Segmentation& seg,
                        const PersistencePairing& pairing, double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw ConfigError("simplify threshold must lie in [0, 1]");
  double lo = t.node(0).value, hi = lo;
  for (const auto& node : t.nodes) {
    lo = std::min(lo, node.value);
    hi = std::max(hi, node.value);
  }
  const double cut = threshold * (hi - lo);

  std::vector<char> alive(t.nodes.size(), 1);
  std::vector<NodeId> parent(t.nodes.size());
  std::vector<std::vector<NodeId>> children(t.nodes.size());
  for (const auto& node : t.nodes) {
    parent[static_cast<std::size_t>(node.id)] = node.parent;
    children[static_cast<std::size_t>(node.id)] = node.children;
  }
  // Arc-merge targets; resolved transitively at the end.
  std::vector<NodeId> merged_into(t.nodes.size(), kNoNode);

  for (;;) {
    NodeId best = kNoNode;
    for (const auto& node : t.nodes) {
      const auto i = static_cast<std::size_t>(node.id);
      if (!alive[i] || !children[i].empty()) continue;  // alive leaves only
      const NodeId s = pairing.partner[i];
      if (s == node.id) continue;  // degenerate single-node pair
      if (t.node(s).kind != NodeKind::saddle) continue;  // never cancel the root pair
      if (parent[i] != s) continue;                      // adjacent pairs only
      if (!(pairing.pers[i] < cut)) continue;
      if (best == kNoNode || pairing.pers[i] < pairing.pers[static_cast<std::size_t>(best)] ||
          (pairing.pers[i] == pairing.pers[static_cast<std::size_t>(best)] &&
           node.vertex < t.node(best).vertex))
        best = node.id;
    }
    if (best == kNoNode) break;

    const auto l = static_cast<std::size_t>(best);
    const NodeId s = parent[l];
    const auto si = static_cast<std::size_t>(s);
    const NodeId sib = children[si][0] == best ? children[si][1] : children[si][0];
    const NodeId up = parent[si];
    parent[static_cast<std::size_t>(sib)] = up;
    auto& upc = children[static_cast<std::size_t>(up)];
    *std::find(upc.begin(), upc.end(), s) = sib;
    merged_into[l] = sib;
    merged_into[si] = sib;
    alive[l] = 0;
    alive[si] = 0;
  }

  SimplifyResult out;
  out.old_to_new.assign(t.nodes.size(), kNoNode);
  NodeId next = 0;
  for (const auto& node : t.nodes)
    if (alive[static_cast<std::size_t>(node.id)]) out.old_to_new[static_cast<std::size_t>(node.id)] = next++;

  out.tree.variant = t.variant;
  out.tree.nodes.resize(static_cast<std::size_t>(next));
  for (const auto& node : t.nodes) {
    const auto i = static_cast<std::size_t>(node.id);
    if (!alive[i]) continue;
    TreeNode nn;
    nn.id = out.old_to_new[i];
    nn.vertex = node.vertex;
    nn.value = node.value;
    nn.kind = node.kind;
    nn.parent = parent[i] == kNoNode ? kNoNode : out.old_to_new[static_cast<std::size_t>(parent[i])];
    for (auto c : children[i]) nn.children.push_back(out.old_to_new[static_cast<std::size_t>(c)]);
    out.tree.nodes[static_cast<std::size_t>(nn.id)] = std::move(nn);
  }
  out.tree.root = out.old_to_new[static_cast<std::size_t>(t.root)];

  // Child order: ascending creation vertex, matching the builder.
  for (auto& node : out.tree.nodes)
    std::sort(node.children.begin(), node.children.end(), [&](NodeId a, NodeId b) {
      return out.tree.node(a).vertex < out.tree.node(b).vertex;
    });

  auto resolve = [&](NodeId a) {
    while (merged_into[static_cast<std::size_t>(a)] != kNoNode)
      a = merged_into[static_cast<std::size_t>(a)];
    return a;
  };
  out.seg.arc_of.resize(seg.arc_of.size());
  out.seg.arc_count.assign(out.tree.nodes.size(), 0);
  for (std::size_t v = 0; v < seg.arc_of.size(); ++v) {
    const NodeId a = out.old_to_new[static_cast<std::size_t>(resolve(seg.arc_of[v]))];
    out.seg.arc_of[v] = a;
    ++out.seg.arc_count[static_cast<std::size_t>(a)];
  }

  out.pairing = pair_persistence(out.tree);
  return out;
}

TreeContext make_context(MergeTree tree, Segmentation seg, PersistencePairing pairing,
                         std::string source, bool normalized, double simplify_threshold) {
  TreeContext ctx;
  ctx.tree = std::move(tree);
  ctx.seg = std::move(seg);
  ctx.pairing = std::move(pairing);
  ctx.source = std::move(source);
  ctx.normalized = normalized;
  ctx.simplify_threshold = simplify_threshold;
  ctx.postorder = tree_postorder(ctx.tree);

  const std::size_t m = ctx.tree.nodes.size();
  ctx.unpaired = survivors(ctx.tree, ctx.pairing);
  ctx.upath_child.assign(m, kNoNode);
  ctx.dummy_value.assign(m, 0.0);
  ctx.stats.assign(m, SubtreeStats{});

  for (NodeId n : ctx.postorder) {
    const auto i = static_cast<std::size_t>(n);
    const auto& node = ctx.tree.node(n);
    ctx.dummy_value[i] =
        node.parent == kNoNode ? node.value : ctx.tree.node(node.parent).value;
    auto& st = ctx.stats[i];
    st.size = 1;
    st.volume = ctx.seg.arc_count[i];
    st.agg_pers =
        (node.kind == NodeKind::saddle || node.kind == NodeKind::root) ? ctx.pairing.pers[i] : 0.0;
    for (auto c : node.children) {
      const auto ci = static_cast<std::size_t>(c);
      st.size += ctx.stats[ci].size;
      st.volume += ctx.stats[ci].volume;
      st.agg_pers += ctx.stats[ci].agg_pers;
      if (ctx.unpaired[ci] == ctx.unpaired[i]) ctx.upath_child[i] = c;
    }
  }
  return ctx;
}

TreeContext build_context(const ScalarGrid& g, TreeVariant variant, double simplify_threshold,
                          std::string source) {
  auto [tree, seg] = build_merge_tree(g, variant);
  auto pairing = pair_persistence(tree);
  if (simplify_threshold > 0.0) {
    auto simp = simplify(tree, seg, pairing, simplify_threshold);
    return make_context(std::move(simp.tree), std::move(simp.seg), std::move(simp.pairing),
                        source.empty() ? g.meta : std::move(source), g.normalized,
                        simplify_threshold);
  }
  return make_context(std::move(tree), std::move(seg), std::move(pairing),
                      source.empty() ? g.meta : std::move(source), g.normalized,
                      simplify_threshold);
}

std::vector<VertexId> region_vertices(const TreeContext& ctx, NodeId root) {
  std::vector<char> in_sub(ctx.tree.nodes.size(), 0);
  for (NodeId n : subtree_nodes(ctx.tree, root)) in_sub[static_cast<std::size_t>(n)] = 1;
  std::vector<VertexId> out;
  for (std::size_t v = 0; v < ctx.seg.arc_of.size(); ++v)
    if (in_sub[static_cast<std::size_t>(ctx.seg.arc_of[v])]) out.push_back(static_cast<VertexId>(v));
  return out;
}

}  // namespace mtl
