#pragma once

#include <cstdint>
#include <vector>

#include "mtlocal/local_distance.hpp"
#include "mtlocal/merge_tree.hpp"
#include "mtlocal/refinement.hpp"

namespace mtl {

/// Connected components (size >= 2) of the graph over retained subtrees with
/// edges where the self-comparison distance is <= tau; groups and members in
/// refinement order.
std::vector<std::vector<NodeId>> symmetry_groups(const DistanceMatrix& self_dm, double tau);

/// Jaccard overlap of two sorted vertex sets; 0 when both are empty.
double overlap(const std::vector<VertexId>& a, const std::vector<VertexId>& b);

struct TrackNode {
  std::int64_t timestep = 0;
  NodeId root = kNoNode;
  std::int64_t volume = 0;
};

struct TrackEdge {
  std::int64_t from = 0, to = 0;  // indices into nodes
  double weight = 0.0;            // region overlap
};

struct Track {
  std::vector<std::int64_t> nodes;  // node indices, consecutive timesteps
  double weight = 0.0;
  std::int64_t length() const { return static_cast<std::int64_t>(nodes.size()); }
};

struct TrackGraph {
  std::vector<TrackNode> nodes;  // sorted by (timestep, refinement position)
  std::vector<TrackEdge> edges;
  std::vector<Track> tracks;     // filled by top_tracks / query_track
};

/// Nodes are the subtrees that survive a per-timestep self refinement (they
/// have a comparable non-nested peer); edges connect consecutive timesteps
/// where the pair is retained in the cross matrix and the regions overlap by
/// at least overlap_min (and by more than zero).
TrackGraph build_track_graph(const std::vector<const TreeContext*>& steps,
                             const std::vector<DistanceMatrix>& dms,
                             double overlap_min, const RefinementConfig& cfg);

enum class TrackOrder { weight, length };

/// Greedy extraction: repeatedly take the maximum-weight path, drop its
/// nodes, stop after k tracks or when the best path fails the filters.
std::vector<Track> top_tracks(const TrackGraph& g, TrackOrder order,
                              std::int64_t min_len, double min_weight, std::int64_t k);

/// Symmetry-seeded tracking: members of the query's symmetry component at its
/// timestep, each extended greedily forward and backward by max-weight edges.
std::vector<Track> query_track(const TrackGraph& g, const DistanceMatrix& self_dm_at_t,
                               std::int64_t timestep, NodeId query_root, double tau_sym);

struct RegionMatch {
  NodeId root_a = kNoNode;
  NodeId root_b = kNoNode;
  std::int64_t volume = 0;
  double lmted = 0.0;
};

/// Subtree pairs with identical region vertex sets, ordered by volume
/// descending (ties by root ids), each annotated with its local distance.
std::vector<RegionMatch> region_compare(const TreeContext& a, const TreeContext& b);

}  // namespace mtl
