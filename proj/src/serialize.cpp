#include "mtlocal/serialize.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mtlocal/errors.hpp"

namespace mtl {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* kind_label(NodeKind k) {
  switch (k) {
    case NodeKind::leaf: return "leaf";
    case NodeKind::saddle: return "saddle";
    default: return "root";
  }
}

NodeKind kind_from_label(const std::string& s) {
  if (s == "leaf") return NodeKind::leaf;
  if (s == "saddle") return NodeKind::saddle;
  if (s == "root") return NodeKind::root;
  throw ValidationError("unknown node kind '" + s + "'");
}

}  // namespace

std::string tree_to_json(const TreeContext& ctx) {
  ordered_json j;
  j["variant"] = ctx.tree.variant == TreeVariant::split ? "split" : "join";
  j["root"] = ctx.tree.root;
  ordered_json nodes = ordered_json::array();
  for (const auto& n : ctx.tree.nodes) {
    const auto i = static_cast<std::size_t>(n.id);
    ordered_json jn;
    jn["id"] = n.id;
    jn["vertex"] = n.vertex;
    jn["value"] = n.value;
    jn["parent"] = n.parent;
    jn["children"] = n.children;
    jn["kind"] = kind_label(n.kind);
    jn["partner"] = ctx.pairing.partner[i];
    jn["birth"] = ctx.pairing.birth[i];
    jn["death"] = ctx.pairing.death[i];
    jn["pers"] = ctx.pairing.pers[i];
    jn["volume"] = ctx.seg.arc_count[i];
    nodes.push_back(std::move(jn));
  }
  j["nodes"] = std::move(nodes);
  ordered_json meta;
  meta["source"] = ctx.source;
  meta["normalized"] = ctx.normalized;
  meta["simplify_threshold"] = ctx.simplify_threshold;
  j["meta"] = std::move(meta);
  return j.dump(2) + "\n";
}

void save_tree_json(const TreeContext& ctx, const std::filesystem::path& path) {
  write_text_file(path, tree_to_json(ctx));
}

static ParsedTree tree_from_json_impl(const std::string& text);

ParsedTree tree_from_json(const std::string& text) {
  try {
    return tree_from_json_impl(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad tree JSON: ") + e.what());
  }
}

static ParsedTree tree_from_json_impl(const std::string& text) {
  const json j = json::parse(text);
  ParsedTree out;
  out.variant_label = j.at("variant").get<std::string>();
  out.tree.variant = out.variant_label == "join" ? TreeVariant::join : TreeVariant::split;
  out.tree.root = j.at("root").get<NodeId>();
  const auto& nodes = j.at("nodes");
  out.tree.nodes.resize(nodes.size());
  out.pairing.partner.assign(nodes.size(), kNoNode);
  out.pairing.birth.assign(nodes.size(), 0.0);
  out.pairing.death.assign(nodes.size(), 0.0);
  out.pairing.pers.assign(nodes.size(), 0.0);
  for (const auto& jn : nodes) {
    TreeNode n;
    n.id = jn.at("id").get<NodeId>();
    n.vertex = jn.at("vertex").get<VertexId>();
    n.value = jn.at("value").get<double>();
    n.parent = jn.at("parent").get<NodeId>();
    n.children = jn.at("children").get<std::vector<NodeId>>();
    n.kind = kind_from_label(jn.at("kind").get<std::string>());
    if (n.id < 0 || n.id >= static_cast<NodeId>(nodes.size()))
      throw ValidationError("tree JSON node id out of range");
    const auto i = static_cast<std::size_t>(n.id);
    out.pairing.partner[i] = jn.at("partner").get<NodeId>();
    out.pairing.birth[i] = jn.at("birth").get<double>();
    out.pairing.death[i] = jn.at("death").get<double>();
    out.pairing.pers[i] = jn.at("pers").get<double>();
    out.tree.nodes[i] = std::move(n);
  }
  return out;
}

void save_segmentation(const Segmentation& seg, const std::vector<std::int64_t>& dims,
                       const std::filesystem::path& path) {
  std::ofstream outf(path);
  if (!outf) throw IoError("cannot write segmentation: " + path.string());
  outf << "dims";
  for (auto d : dims) outf << ' ' << d;
  outf << '\n';
  for (std::size_t v = 0; v < seg.arc_of.size(); ++v)
    outf << seg.arc_of[v] << (((v + 1) % 16 == 0) ? '\n' : ' ');
  if (seg.arc_of.size() % 16 != 0) outf << '\n';
  if (!outf) throw IoError("write failed: " + path.string());
}

std::vector<NodeId> load_segmentation(const std::filesystem::path& path,
                                      std::vector<std::int64_t>* dims_out) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open segmentation: " + path.string());
  std::string header;
  if (!std::getline(in, header))
    throw ValidationError("empty segmentation file: " + path.string());
  std::istringstream hs(header);
  std::string word;
  if (!(hs >> word) || word != "dims")
    throw ValidationError("segmentation must start with a dims header: " + path.string());
  std::vector<std::int64_t> dims;
  std::int64_t d;
  while (hs >> d) dims.push_back(d);
  std::int64_t prod = 1;
  for (auto e : dims) prod *= e;
  std::vector<NodeId> arcs;
  NodeId a;
  while (in >> a) arcs.push_back(a);
  if (dims.empty() || static_cast<std::int64_t>(arcs.size()) != prod)
    throw ValidationError("segmentation size does not match dims: " + path.string());
  if (dims_out) *dims_out = dims;
  return arcs;
}

std::string matrix_to_csv(const DistanceMatrix& dm) {
  std::ostringstream out;
  out << "subtree";
  for (std::int64_t c = 0; c < dm.cols(); ++c)
    out << ",a" << dm.col_roots[static_cast<std::size_t>(c)];
  out << '\n';
  for (std::int64_t r = 0; r < dm.rows(); ++r) {
    out << 'b' << dm.row_roots[static_cast<std::size_t>(r)];
    for (std::int64_t c = 0; c < dm.cols(); ++c) {
      out << ',';
      if (dm.present[dm.at(r, c)])
        out << fmt_double(dm.value[dm.at(r, c)]);
      else
        out << "PRUNED";
    }
    out << '\n';
  }
  return out.str();
}

void save_matrix_csv(const DistanceMatrix& dm, const std::filesystem::path& path) {
  write_text_file(path, matrix_to_csv(dm));
}

DistanceMatrix matrix_from_csv(const std::string& text) {
  DistanceMatrix dm;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty matrix CSV");
  {
    std::istringstream ls(line);
    std::string cell;
    if (!std::getline(ls, cell, ',') || cell != "subtree")
      throw ValidationError("matrix CSV must start with a 'subtree' header");
    while (std::getline(ls, cell, ',')) {
      if (cell.empty() || cell[0] != 'a')
        throw ValidationError("bad matrix column label '" + cell + "'");
      dm.col_roots.push_back(std::stoll(cell.substr(1)));
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    if (!std::getline(ls, cell, ',') || cell.empty() || cell[0] != 'b')
      throw ValidationError("bad matrix row label");
    dm.row_roots.push_back(std::stoll(cell.substr(1)));
    std::int64_t got = 0;
    while (std::getline(ls, cell, ',')) {
      ++got;
      if (cell == "PRUNED") {
        dm.value.push_back(0.0);
        dm.present.push_back(0);
      } else {
        dm.value.push_back(std::stod(cell));
        dm.present.push_back(1);
      }
    }
    if (got != static_cast<std::int64_t>(dm.col_roots.size()))
      throw ValidationError("matrix CSV row width mismatch");
  }
  return dm;
}

std::string matrix_meta_json(const DistanceMatrix& dm) {
  ordered_json j;
  j["cost_model"] = "W";
  j["rows"] = dm.rows();
  j["cols"] = dm.cols();
  j["source_a"] = dm.source_a;
  j["source_b"] = dm.source_b;
  j["normalized_a"] = dm.normalized_a;
  j["normalized_b"] = dm.normalized_b;
  j["self_comparison"] = dm.self_comparison;
  ordered_json cfg;
  cfg["node_ratio"] = dm.config.node_ratio;
  cfg["volume_ratio"] = dm.config.volume_ratio;
  cfg["pers_ratio"] = dm.config.pers_ratio;
  cfg["use_knee"] = dm.config.use_knee;
  cfg["self_mode"] = dm.config.self_mode;
  j["refinement"] = std::move(cfg);
  ordered_json thr;
  thr["node_ratio"] = dm.thresholds.node_ratio;
  thr["volume_ratio"] = dm.thresholds.volume_ratio;
  thr["pers_ratio"] = dm.thresholds.pers_ratio;
  j["resolved_thresholds"] = std::move(thr);
  return j.dump(2) + "\n";
}

void save_matrix_meta(const DistanceMatrix& dm, const std::filesystem::path& path) {
  write_text_file(path, matrix_meta_json(dm));
}

void save_matrix_heatmap(const DistanceMatrix& dm, const std::filesystem::path& path,
                         double lo, double hi) {
  if (!(hi > lo)) throw ConfigError("heatmap range must satisfy hi > lo");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write heatmap: " + path.string());
  out << "P6\n" << dm.cols() << ' ' << dm.rows() << "\n255\n";
  for (std::int64_t r = 0; r < dm.rows(); ++r) {
    for (std::int64_t c = 0; c < dm.cols(); ++c) {
      unsigned char rgb[3] = {128, 128, 128};  // pruned -> gray
      if (dm.present[dm.at(r, c)]) {
        double x = (dm.value[dm.at(r, c)] - lo) / (hi - lo);
        x = x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
        // blue (low) -> white (mid) -> red (high)
        const double t = x <= 0.5 ? x / 0.5 : (x - 0.5) / 0.5;
        if (x <= 0.5) {
          rgb[0] = static_cast<unsigned char>(255.0 * t);
          rgb[1] = static_cast<unsigned char>(255.0 * t);
          rgb[2] = 255;
        } else {
          rgb[0] = 255;
          rgb[1] = static_cast<unsigned char>(255.0 * (1.0 - t));
          rgb[2] = static_cast<unsigned char>(255.0 * (1.0 - t));
        }
      }
      out.write(reinterpret_cast<const char*>(rgb), 3);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::string track_graph_to_json(const TrackGraph& g) {
  ordered_json j;
  ordered_json nodes = ordered_json::array();
  for (const auto& n : g.nodes) {
    ordered_json jn;
    jn["t"] = n.timestep;
    jn["root"] = n.root;
    jn["volume"] = n.volume;
    nodes.push_back(std::move(jn));
  }
  j["nodes"] = std::move(nodes);
  ordered_json edges = ordered_json::array();
  for (const auto& e : g.edges) {
    ordered_json je;
    je["from"] = e.from;
    je["to"] = e.to;
    je["weight"] = e.weight;
    edges.push_back(std::move(je));
  }
  j["edges"] = std::move(edges);
  ordered_json tracks = ordered_json::array();
  for (const auto& t : g.tracks) {
    ordered_json jt;
    jt["nodes"] = t.nodes;
    jt["length"] = t.length();
    jt["weight"] = t.weight;
    tracks.push_back(std::move(jt));
  }
  j["tracks"] = std::move(tracks);
  return j.dump(2) + "\n";
}

void save_track_graph(const TrackGraph& g, const std::filesystem::path& path) {
  write_text_file(path, track_graph_to_json(g));
}

TrackGraph track_graph_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad track graph JSON: ") + e.what());
  }
  TrackGraph g;
  for (const auto& jn : j.at("nodes"))
    g.nodes.push_back({jn.at("t").get<std::int64_t>(), jn.at("root").get<NodeId>(),
                       jn.at("volume").get<std::int64_t>()});
  for (const auto& je : j.at("edges"))
    g.edges.push_back({je.at("from").get<std::int64_t>(), je.at("to").get<std::int64_t>(),
                       je.at("weight").get<double>()});
  for (const auto& jt : j.at("tracks")) {
    Track t;
    t.nodes = jt.at("nodes").get<std::vector<std::int64_t>>();
    t.weight = jt.at("weight").get<double>();
    g.tracks.push_back(std::move(t));
  }
  return g;
}

std::string groups_to_json(const std::vector<std::vector<NodeId>>& groups, double tau) {
  ordered_json j;
  j["tau"] = tau;
  j["groups"] = groups;
  return j.dump(2) + "\n";
}

std::string region_matches_to_csv(const std::vector<RegionMatch>& rows) {
  std::ostringstream out;
  out << "root_a,root_b,volume,lmted\n";
  for (const auto& m : rows)
    out << m.root_a << ',' << m.root_b << ',' << m.volume << ',' << fmt_double(m.lmted)
        << '\n';
  return out.str();
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot hash missing file: " + path.string());
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 1099511628211ULL;
    }
    if (in.eof()) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mtl
