#pragma once

#include <filesystem>
#include <string>

#include "mtlocal/analysis.hpp"
#include "mtlocal/local_distance.hpp"
#include "mtlocal/merge_tree.hpp"

namespace mtl {

/// Tree export: {"variant", "nodes":[{id,vertex,value,parent,children,kind,
/// partner,pers}], "root", "meta"}. Deterministic bytes.
std::string tree_to_json(const TreeContext& ctx);
void save_tree_json(const TreeContext& ctx, const std::filesystem::path& path);

/// Rebuilds tree + pairing (and arc counts when a segmentation was saved
/// separately) from the JSON written by tree_to_json. Segmentation arc_of is
/// left empty; arc counts are restored from node volumes when present.
struct ParsedTree {
  MergeTree tree;
  PersistencePairing pairing;
  std::string variant_label;
};
ParsedTree tree_from_json(const std::string& text);

/// Segmentation: same layout as the ASCII field format, one arc id per vertex.
void save_segmentation(const Segmentation& seg, const std::vector<std::int64_t>& dims,
                       const std::filesystem::path& path);
std::vector<NodeId> load_segmentation(const std::filesystem::path& path,
                                      std::vector<std::int64_t>* dims_out = nullptr);

/// CSV with header row/column naming subtree roots in refinement order;
/// pruned entries carry the PRUNED sentinel. Values round-trip exactly.
std::string matrix_to_csv(const DistanceMatrix& dm);
void save_matrix_csv(const DistanceMatrix& dm, const std::filesystem::path& path);
DistanceMatrix matrix_from_csv(const std::string& text);

/// Metadata sidecar: cost model, sources, normalization flags, refinement.
std::string matrix_meta_json(const DistanceMatrix& dm);
void save_matrix_meta(const DistanceMatrix& dm, const std::filesystem::path& path);

/// Binary PPM heatmap, blue -> white -> red over [lo, hi]; pruned cells gray.
void save_matrix_heatmap(const DistanceMatrix& dm, const std::filesystem::path& path,
                         double lo = 0.0, double hi = 0.1);

std::string track_graph_to_json(const TrackGraph& g);
void save_track_graph(const TrackGraph& g, const std::filesystem::path& path);
TrackGraph track_graph_from_json(const std::string& text);

std::string groups_to_json(const std::vector<std::vector<NodeId>>& groups, double tau);

std::string region_matches_to_csv(const std::vector<RegionMatch>& rows);

/// FNV-1a 64-bit over a file's bytes, hex-encoded; used by run manifests.
std::string hash_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace mtl
