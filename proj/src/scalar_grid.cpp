#include "mtlocal/scalar_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtlocal/errors.hpp"

namespace mtl {

std::int64_t ScalarGrid::size() const {
  std::int64_t n = 1;
  for (auto d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

void validate_grid(const ScalarGrid& g) {
  if (g.dims.empty() || g.dims.size() > 3)
    throw ValidationError("grid must have 1 to 3 dimensions");
  for (auto d : g.dims)
    if (d < 1) throw ValidationError("grid dimensions must be >= 1");
  if (static_cast<std::int64_t>(g.values.size()) != g.size())
    throw ValidationError("value count does not match dims product");
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (!std::isfinite(g.values[i]))
      throw ValidationError("non-finite value at vertex " + std::to_string(i));
  }
}

TotalOrder total_order(const ScalarGrid& g, Direction dir) {
  validate_grid(g);
  TotalOrder o;
  o.perm.resize(g.values.size());
  std::iota(o.perm.begin(), o.perm.end(), VertexId{0});
  const auto& v = g.values;
  if (dir == Direction::ascending) {
    std::sort(o.perm.begin(), o.perm.end(), [&](VertexId a, VertexId b) {
      if (v[static_cast<std::size_t>(a)] != v[static_cast<std::size_t>(b)])
        return v[static_cast<std::size_t>(a)] < v[static_cast<std::size_t>(b)];
      return a < b;
    });
  } else {
    std::sort(o.perm.begin(), o.perm.end(), [&](VertexId a, VertexId b) {
      if (v[static_cast<std::size_t>(a)] != v[static_cast<std::size_t>(b)])
        return v[static_cast<std::size_t>(a)] > v[static_cast<std::size_t>(b)];
      return a < b;
    });
  }
  o.rank.resize(o.perm.size());
  for (std::size_t k = 0; k < o.perm.size(); ++k)
    o.rank[static_cast<std::size_t>(o.perm[k])] = static_cast<std::int64_t>(k);
  return o;
}

namespace {

// Freudenthal offsets: nonzero corners of {0,1}^d along the main diagonal
// plus their negatives.
constexpr int kOff1[2][1] = {{1}, {-1}};
constexpr int kOff2[6][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 0}, {0, -1}, {-1, -1}};
constexpr int kOff3[14][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 1},
                              {0, 1, 1}, {1, 1, 1}, {-1, 0, 0}, {0, -1, 0}, {0, 0, -1},
                              {-1, -1, 0}, {-1, 0, -1}, {0, -1, -1}, {-1, -1, -1}};

}  // namespace

int freudenthal_neighbors(const ScalarGrid& g, VertexId v, VertexId* out) {
  const int nd = g.ndims();
  std::int64_t c[3] = {0, 0, 0};
  std::int64_t rest = v;
  for (int a = 0; a < nd; ++a) {
    c[a] = rest % g.dims[static_cast<std::size_t>(a)];
    rest /= g.dims[static_cast<std::size_t>(a)];
  }
  int cnt = 0;
  auto push = [&](const int* off) {
    std::int64_t q[3];
    for (int a = 0; a < nd; ++a) {
      q[a] = c[a] + off[a];
      if (q[a] < 0 || q[a] >= g.dims[static_cast<std::size_t>(a)]) return;
    }
    std::int64_t idx = 0;
    for (int a = nd - 1; a >= 0; --a) idx = idx * g.dims[static_cast<std::size_t>(a)] + q[a];
    out[cnt++] = idx;
  };
  if (nd == 1)
    for (const auto& o : kOff1) push(o);
  else if (nd == 2)
    for (const auto& o : kOff2) push(o);
  else
    for (const auto& o : kOff3) push(o);
  return cnt;
}

ScalarGrid normalize_range(const ScalarGrid& g) {
  validate_grid(g);
  ScalarGrid out = g;
  const auto [mn, mx] = std::minmax_element(g.values.begin(), g.values.end());
  const double lo = *mn, hi = *mx;
  if (hi == lo) {
    std::fill(out.values.begin(), out.values.end(), 0.0);
  } else {
    const double span = hi - lo;
    for (auto& x : out.values) x = (x - lo) / span;
  }
  out.normalized = true;
  return out;
}

}  // namespace mtl
