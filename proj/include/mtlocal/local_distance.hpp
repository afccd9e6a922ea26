#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtlocal/edit_distance.hpp"
#include "mtlocal/merge_tree.hpp"
#include "mtlocal/refinement.hpp"

namespace mtl {

/// Truncated-cost companion tables to DcTables. A cell (i,j) treats the elder
/// survivors of T[i] and T[j] as unpaired; its recursion reads D' cells for
/// child pairs on both unpaired paths and Dc cells elsewhere.
struct DpTables {
  std::int64_t n1 = 0, n2 = 0;
  std::vector<double> tree, forest;
  std::vector<double> tree1_empty, forest1_empty;
  std::vector<double> empty_tree2, empty_forest2;

  double& t(NodeId i, NodeId j) { return tree[static_cast<std::size_t>(i * n2 + j)]; }
  double& f(NodeId i, NodeId j) { return forest[static_cast<std::size_t>(i * n2 + j)]; }
  double t(NodeId i, NodeId j) const { return tree[static_cast<std::size_t>(i * n2 + j)]; }
  double f(NodeId i, NodeId j) const { return forest[static_cast<std::size_t>(i * n2 + j)]; }
};

struct DualTables {
  DcTables dc;
  DpTables dp;
};

/// One bottom-up pass fills both table sets for every subtree pair.
DualTables compute_all_tables(const TreeContext& a, const TreeContext& b);

/// Local distance of one subtree pair from filled tables: D'(i,j) plus the
/// residual cost of the two truncated contexts.
double lmted_from_tables(const DualTables& tables, const TreeContext& a,
                         const TreeContext& b, NodeId i, NodeId j);

/// From-scratch recomputation over the two subtrees only (fresh tables
/// restricted to T[i] x T[j]); used as an independence oracle.
double lmted_pair(const TreeContext& a, NodeId i, const TreeContext& b, NodeId j);

/// All-pairs local distances with refinement. Columns index subtrees of a,
/// rows subtrees of b, both in refinement order; pruned pairs carry no value.
struct DistanceMatrix {
  std::vector<NodeId> col_roots;  // subtrees of a
  std::vector<NodeId> row_roots;  // subtrees of b
  std::vector<double> value;      // rows x cols, row-major
  std::vector<std::uint8_t> present;
  RefinementConfig config;
  ResolvedThresholds thresholds;
  std::string source_a, source_b;
  bool normalized_a = false, normalized_b = false;
  bool self_comparison = false;

  std::int64_t rows() const { return static_cast<std::int64_t>(row_roots.size()); }
  std::int64_t cols() const { return static_cast<std::int64_t>(col_roots.size()); }
  std::size_t at(std::int64_t r, std::int64_t c) const {
    return static_cast<std::size_t>(r * cols() + c);
  }
};

DistanceMatrix lmted_all_pairs(const TreeContext& a, const TreeContext& b,
                               const RefinementConfig& cfg);

}  // namespace mtl
