#pragma once

#include <cstdint>
#include <vector>

#include "mtlocal/cost_model.hpp"
#include "mtlocal/merge_tree.hpp"

namespace mtl {

struct AssignmentResult {
  double cost = 0.0;
  std::vector<int> assignment;  // assignment[row] = column
};

/// Exact min-cost perfect matching on a square matrix (shortest augmenting
/// paths with potentials, O(n^3)); deterministic under ties by lowest index.
AssignmentResult min_cost_matching(const std::vector<double>& cost, int n);

/// Constrained edit distance tables between two trees, indexed by node id.
/// theta rows/columns live in the *_empty vectors.
struct DcTables {
  std::int64_t n1 = 0, n2 = 0;
  std::vector<double> tree, forest;               // n1 x n2, row-major by T1 node id
  std::vector<double> tree1_empty, forest1_empty; // per T1 node: D(T[i], theta)
  std::vector<double> empty_tree2, empty_forest2; // per T2 node: D(theta, T[j])

  double& t(NodeId i, NodeId j) { return tree[static_cast<std::size_t>(i * n2 + j)]; }
  double& f(NodeId i, NodeId j) { return forest[static_cast<std::size_t>(i * n2 + j)]; }
  double t(NodeId i, NodeId j) const { return tree[static_cast<std::size_t>(i * n2 + j)]; }
  double f(NodeId i, NodeId j) const { return forest[static_cast<std::size_t>(i * n2 + j)]; }
};

/// Per-cell decision record for the optional trace export.
struct EditTraceCell {
  int tree_branch = -1;    // 0 relabel/match, 1 grow into T2 child, 2 grow into T1 child
  int forest_branch = -1;
  std::vector<int> matching;  // forest matching assignment (rows = T1 children + slots)
};

struct EditTrace {
  std::int64_t n1 = 0, n2 = 0;
  std::vector<EditTraceCell> cells;  // n1 x n2
};

DcTables compute_dc_tables(const TreeContext& a, const TreeContext& b,
                           EditTrace* trace = nullptr);

/// Global constrained edit distance between the full trees.
double mted(const TreeContext& a, const TreeContext& b, EditTrace* trace = nullptr);

}  // namespace mtl
