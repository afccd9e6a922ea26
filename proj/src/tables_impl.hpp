#pragma once

// Internal table-fill engine shared by edit_distance.cpp and
// local_distance.cpp. Postorders may be restricted to subtrees; tables are
// always allocated full-size and only the listed cells are touched.

#include <vector>

#include "mtlocal/edit_distance.hpp"
#include "mtlocal/local_distance.hpp"

namespace mtl::detail {

// Min-cost matching between the children forests of i and j, padded with
// empty slots (side n_i + n_j). To keep swapped-argument runs bitwise equal,
// the solver always runs on the lexicographically smaller of the matrix and
// its transpose. real/del/ins hold the child-tree distances in child order.
struct ForestMatching {
  int ni = 0, nj = 0;
  std::vector<double> real;  // ni x nj, row-major
  std::vector<double> del;   // per child of i
  std::vector<double> ins;   // per child of j

  // assignment (optional) receives rows = children of i + slots.
  double solve(std::vector<int>* assignment = nullptr) const;
};

void fill_dc(const TreeContext& a, const TreeContext& b,
             const std::vector<NodeId>& post1, const std::vector<NodeId>& post2,
             DcTables& dc, EditTrace* trace);

void fill_dp(const TreeContext& a, const TreeContext& b,
             const std::vector<NodeId>& post1, const std::vector<NodeId>& post2,
             const DcTables& dc, DpTables& dp);

}  // namespace mtl::detail
