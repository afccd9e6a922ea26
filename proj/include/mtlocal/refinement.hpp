#pragma once

#include <cstdint>
#include <vector>

#include "mtlocal/merge_tree.hpp"

namespace mtl {

/// Ratio thresholds live in [0,1]; 0 disables a criterion. self_mode drops
/// identical-root and nested pairs; use_knee derives thresholds from the
/// pair-count curves instead of the fixed values.
struct RefinementConfig {
  double node_ratio = 0.5;
  double volume_ratio = 0.5;
  double pers_ratio = 0.5;
  bool use_knee = false;
  bool self_mode = false;
};

void validate_config(const RefinementConfig& cfg);

/// Subtree roots ordered descending by (size, volume, root id).
std::vector<NodeId> order_subtrees(const TreeContext& ctx);

/// Knee rule: the ratio just after the largest single-step count drop when
/// that drop exceeds twice the mean step drop; 0.5 otherwise.
double knee_threshold(const std::vector<double>& ratios,
                      const std::vector<std::int64_t>& counts);

struct ResolvedThresholds {
  double node_ratio = 0.5;
  double volume_ratio = 0.5;
  double pers_ratio = 0.5;
};

/// Applies the knee rule per criterion when requested, else passes the
/// configured thresholds through.
ResolvedThresholds resolve_thresholds(const TreeContext& a, const TreeContext& b,
                                      const RefinementConfig& cfg);

/// Row-major mask over (a-subtree, b-subtree) pairs in node-id order:
/// 1 = retained. Pairs fail when any min/max stat ratio falls below its
/// threshold (0/0 counts as 1); self_mode additionally drops (x,x) and
/// ancestor-nested pairs.
std::vector<std::uint8_t> prune_pairs(const TreeContext& a, const TreeContext& b,
                                      const RefinementConfig& cfg,
                                      const ResolvedThresholds& thr);

/// Standalone merge-tree view of T[root]: a dummy root at the parent's value
/// with the subtree below it, so every leaf is paired inside the view. The
/// full tree canonicalizes to itself.
struct CanonicalSubtree {
  MergeTree tree;
  PersistencePairing pairing;
  NodeId dummy_root = kNoNode;  // kNoNode when root was the full tree
};

CanonicalSubtree canonicalize_subtree(const TreeContext& ctx, NodeId root);

}  // namespace mtl
