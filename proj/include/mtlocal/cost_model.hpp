#pragma once

#include <algorithm>
#include <cmath>

#include "mtlocal/merge_tree.hpp"

namespace mtl {

struct PersistencePoint {
  double birth = 0.0;
  double death = 0.0;
  double pers() const { return death - birth; }
};

/// Overhang-capped relabel: min of the L-inf move and the diagonal route
/// (delete + insert halves).
inline double relabel_cost(const PersistencePoint& p, const PersistencePoint& q) {
  const double move = std::max(std::abs(q.birth - p.birth), std::abs(q.death - p.death));
  return std::min(move, (p.pers() + q.pers()) / 2.0);
}

inline double delete_cost(const PersistencePoint& p) { return p.pers() / 2.0; }
inline double insert_cost(const PersistencePoint& q) { return q.pers() / 2.0; }

/// Truncation context of one subtree: the unpaired leaf's value and the dummy
/// value it is paired against (parent value; the root's own value for the full
/// tree).
struct TruncatedContext {
  double unpaired_value = 0.0;
  double dummy_value = 0.0;

  double truncated_persistence() const { return std::abs(unpaired_value - dummy_value); }
  PersistencePoint point() const {
    return {std::min(unpaired_value, dummy_value), std::max(unpaired_value, dummy_value)};
  }
};

/// Cost table for edits under truncation. Null point = gap; the unpaired
/// flags mark nodes whose pair lies outside the compared subtrees; their
/// contribution is deferred to gamma_cap.
///   paired -> unpaired/gap : delete(p)
///   unpaired/gap -> paired : insert(q)
///   paired -> paired       : relabel(p, q)
///   otherwise              : 0
inline double truncated_cost(const PersistencePoint* p, bool p_unpaired,
                             const PersistencePoint* q, bool q_unpaired) {
  const bool i_open = (p == nullptr) || p_unpaired;
  const bool j_open = (q == nullptr) || q_unpaired;
  if (!i_open && j_open) return delete_cost(*p);
  if (i_open && !j_open) return insert_cost(*q);
  if (!i_open && !j_open) return relabel_cost(*p, *q);
  return 0.0;
}

/// Residual cost of the two unpaired nodes against their dummies: relabel of
/// the truncated points when both contexts exist, half the truncated
/// persistence when exactly one does, 0 when neither does.
inline double gamma_cap(const TruncatedContext* a, const TruncatedContext* b) {
  if (a && b) return relabel_cost(a->point(), b->point());
  if (a) return a->truncated_persistence() / 2.0;
  if (b) return b->truncated_persistence() / 2.0;
  return 0.0;
}

/// Per-node persistence point from the pairing.
inline PersistencePoint node_point(const PersistencePairing& p, NodeId n) {
  const auto i = static_cast<std::size_t>(n);
  return {p.birth[i], p.death[i]};
}

/// Truncation context of subtree T[root] in ctx.
inline TruncatedContext subtree_truncation(const TreeContext& ctx, NodeId root) {
  const auto r = static_cast<std::size_t>(root);
  const NodeId u = ctx.unpaired[r];
  return {ctx.tree.node(u).value, ctx.dummy_value[r]};
}

}  // namespace mtl
