#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mtl {

using VertexId = std::int64_t;

/// Regular 1D/2D/3D scalar field, row-major with x fastest.
struct ScalarGrid {
  std::vector<std::int64_t> dims;  // 1 to 3 axes, each >= 1
  std::vector<double> values;      // dims product entries, all finite
  std::string meta;                // optional source label
  bool normalized = false;         // set by normalize_range

  int ndims() const { return static_cast<int>(dims.size()); }
  std::int64_t size() const;
};

/// Throws ValidationError unless dims/values are consistent and finite.
void validate_grid(const ScalarGrid& g);

enum class Direction { ascending, descending };

/// Tie-broken total vertex order: by value in the given direction,
/// ties by ascending vertex index.
struct TotalOrder {
  std::vector<VertexId> perm;       // perm[k] = vertex at sweep position k
  std::vector<std::int64_t> rank;   // rank[v] = sweep position of vertex v
};

TotalOrder total_order(const ScalarGrid& g, Direction dir);

/// Freudenthal neighborhood (2/6/14 neighbors in 1D/2D/3D).
/// Writes neighbor vertex ids into out (capacity >= 14), returns the count.
int freudenthal_neighbors(const ScalarGrid& g, VertexId v, VertexId* out);

/// Affine map of values onto [0,1]; constant fields map to all zeros.
ScalarGrid normalize_range(const ScalarGrid& g);

enum class FieldFormat { ascii, raw_f32, raw_f64 };

/// ASCII format: "dims n1 [n2 [n3]]" header then whitespace-separated values.
/// Raw formats: <name>.raw next to a <name>.json sidecar holding
/// {"dims":[...],"dtype":"f32"|"f64","endianness":"little"}.
ScalarGrid load_field(const std::filesystem::path& path, FieldFormat format);
void save_field(const ScalarGrid& g, const std::filesystem::path& path, FieldFormat format);

/// Picks raw_f32/raw_f64 via the sidecar when path ends in .raw, else ascii.
FieldFormat detect_format(const std::filesystem::path& path);

}  // namespace mtl
