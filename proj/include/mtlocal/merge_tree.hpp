#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtlocal/scalar_grid.hpp"

namespace mtl {

using NodeId = std::int64_t;
constexpr NodeId kNoNode = -1;

enum class TreeVariant { join, split };
enum class NodeKind { leaf, saddle, root };

struct TreeNode {
  NodeId id = kNoNode;
  VertexId vertex = -1;
  double value = 0.0;
  NodeId parent = kNoNode;
  std::vector<NodeId> children;  // <= 2 after multi-saddle splitting; root has 1
  NodeKind kind = NodeKind::leaf;
};

struct MergeTree {
  TreeVariant variant = TreeVariant::split;
  std::vector<TreeNode> nodes;  // node id == index
  NodeId root = kNoNode;

  std::int64_t node_count() const { return static_cast<std::int64_t>(nodes.size()); }
  const TreeNode& node(NodeId id) const { return nodes[static_cast<std::size_t>(id)]; }
  bool is_leaf(NodeId id) const { return node(id).children.empty(); }
};

/// Maps every grid vertex to the arc (upper node id) whose sweep absorbed it;
/// each node also owns its creation vertex.
struct Segmentation {
  std::vector<NodeId> arc_of;          // per vertex
  std::vector<std::int64_t> arc_count; // per node id
};

struct TreeAndSegmentation {
  MergeTree tree;
  Segmentation seg;
};

/// Union-find sweep over the tie-broken total order. Split trees sweep
/// descending (leaves at maxima), join trees ascending. The last swept vertex
/// becomes a one-child root; multi-saddles split into chains of binary
/// saddles at equal value, children ordered by vertex index.
TreeAndSegmentation build_merge_tree(const ScalarGrid& g, TreeVariant variant);

/// Elder-rule pairing. Every node belongs to exactly one pair; both members
/// carry the pair's (birth, death) point; pers = death - birth.
struct PersistencePairing {
  std::vector<NodeId> partner;  // per node id
  std::vector<double> birth, death, pers;
};

PersistencePairing pair_persistence(const MergeTree& t);

/// Iteratively cancels the lowest-persistence leaf/saddle pair with
/// pers < threshold * field range, merging cancelled arcs into the surviving
/// sibling arc. Node ids are renumbered compactly; pairing is re-derived.
struct SimplifyResult {
  MergeTree tree;
  Segmentation seg;
  PersistencePairing pairing;
  std::vector<NodeId> old_to_new;  // kNoNode for removed nodes
};

SimplifyResult simplify(const MergeTree& t, const Segmentation& seg,
                        const PersistencePairing& pairing, double threshold);

/// The unique leaf of T[root] whose persistence partner lies outside the
/// subtree (the elder-rule survivor); for the full tree, the global extremum.
NodeId unpaired_leaf(const MergeTree& t, const PersistencePairing& p, NodeId root);

struct SubtreeStats {
  std::int64_t size = 0;      // nodes in the subtree
  std::int64_t volume = 0;    // sum of arc vertex counts
  double agg_pers = 0.0;      // sum of pers over pairs fully inside
};

SubtreeStats subtree_stats(const MergeTree& t, const Segmentation& seg,
                           const PersistencePairing& p, NodeId root);

/// Everything downstream passes (tree, segmentation, pairing) around together
/// with per-subtree caches: stats, elder survivors, the child on the unpaired
/// path, the truncation dummy value (parent value; own value at the root),
/// and a children-first evaluation order.
struct TreeContext {
  MergeTree tree;
  Segmentation seg;
  PersistencePairing pairing;
  std::vector<SubtreeStats> stats;       // per node
  std::vector<NodeId> unpaired;          // elder survivor per node
  std::vector<NodeId> upath_child;       // child containing unpaired[n], kNoNode at leaves
  std::vector<double> dummy_value;       // f(i') per node
  std::vector<NodeId> postorder;         // children before parents
  std::string source;                    // label for exports
  bool normalized = false;
  double simplify_threshold = 0.0;
};

TreeContext make_context(MergeTree tree, Segmentation seg, PersistencePairing pairing,
                         std::string source = {}, bool normalized = false,
                         double simplify_threshold = 0.0);

/// Convenience pipeline: build, optionally simplify, assemble the context.
TreeContext build_context(const ScalarGrid& g, TreeVariant variant,
                          double simplify_threshold, std::string source = {});

/// Nodes of T[root] in a deterministic order (preorder, children in order).
std::vector<NodeId> subtree_nodes(const MergeTree& t, NodeId root);

/// Sorted vertex ids of the region covered by T[root]'s arcs.
std::vector<VertexId> region_vertices(const TreeContext& ctx, NodeId root);

}  // namespace mtl
