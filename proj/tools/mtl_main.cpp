// mtl: merge trees, local edit distances, symmetry, tracking — file in, file out.
// Links the C API only.
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mtlocal.h"

namespace {

using ordered_json = nlohmann::ordered_json;

int exit_code(mtl_status s) {
  switch (s) {
    case MTL_ERR_IO:
      return 1;
    case MTL_ERR_VALIDATION:
      return 2;
    default:
      return 3;  // config + argument errors
  }
}

void check(mtl_status s) {
  if (s == MTL_OK) return;
  std::cerr << "error: " << mtl_last_error() << "\n";
  std::exit(exit_code(s));
}

[[noreturn]] void die(int code, const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  std::exit(code);
}

struct GridDel {
  void operator()(mtl_grid* g) const { mtl_grid_free(g); }
};
struct TreeDel {
  void operator()(mtl_tree* t) const { mtl_tree_free(t); }
};
struct MatrixDel {
  void operator()(mtl_matrix* m) const { mtl_matrix_free(m); }
};
struct TracksDel {
  void operator()(mtl_tracks* t) const { mtl_tracks_free(t); }
};
using GridPtr = std::unique_ptr<mtl_grid, GridDel>;
using TreePtr = std::unique_ptr<mtl_tree, TreeDel>;
using MatrixPtr = std::unique_ptr<mtl_matrix, MatrixDel>;
using TracksPtr = std::unique_ptr<mtl_tracks, TracksDel>;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hash_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die(1, "cannot open '" + path + "'");
  std::uint64_t h = 14695981039346656037ULL;
  char buf[65536];
  while (in.read(buf, sizeof buf), in.gcount() > 0)
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  char out[32];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) die(1, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) die(1, "failed writing '" + path + "'");
}

// Shared per-command options.
struct Common {
  std::string format = "auto";
  std::string variant = "split";
  double simplify = 0.0;
  bool normalize = true;
  int threads = 0;
  std::string out;
};

void add_common(CLI::App* cmd, Common& o, double simplify_default, bool out_required) {
  o.simplify = simplify_default;
  cmd->add_option("--format", o.format, "Field format: auto, ascii, raw_f32, raw_f64")
      ->capture_default_str();
  cmd->add_option("--variant", o.variant, "Tree variant: split or join")
      ->capture_default_str();
  cmd->add_option("--simplify", o.simplify,
                  "Persistence simplification threshold as a fraction of the value range")
      ->capture_default_str();
  cmd->add_flag("--normalize,!--no-normalize", o.normalize,
                "Normalize field values to [0,1] (default on)");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware default)");
  auto* out = cmd->add_option("--out", o.out, "Output path");
  if (out_required) out->required();
}

TreePtr build_tree(const std::string& path, const Common& o) {
  mtl_grid* raw = nullptr;
  check(mtl_grid_load(path.c_str(), o.format.c_str(), &raw));
  GridPtr g(raw);
  if (o.normalize) {
    mtl_grid* n = nullptr;
    check(mtl_grid_normalize(g.get(), &n));
    g.reset(n);
  }
  mtl_tree* t = nullptr;
  check(mtl_tree_build(g.get(), o.variant.c_str(), o.simplify, &t));
  return TreePtr(t);
}

ordered_json common_config(const Common& o) {
  ordered_json j;
  j["format"] = o.format;
  j["variant"] = o.variant;
  j["simplify"] = o.simplify;
  j["normalize"] = o.normalize;
  j["threads"] = o.threads;
  return j;
}

// Manifest goes to <out>.manifest.json, written after all other outputs.
void write_manifest(const std::string& out_path, const std::vector<std::string>& argv,
                    const ordered_json& config, const std::vector<std::string>& inputs,
                    std::chrono::steady_clock::time_point t0) {
  ordered_json m;
  std::string cmd;
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (i) cmd += ' ';
    cmd += argv[i];
  }
  m["command"] = cmd;
  m["config"] = config;
  ordered_json in = ordered_json::object();
  for (const auto& p : inputs) in[p] = hash_input(p);
  m["inputs"] = std::move(in);
  m["version"] = mtl_version();
  const auto dt = std::chrono::steady_clock::now() - t0;
  m["wall_time_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
  write_text(out_path + ".manifest.json", m.dump(2) + "\n");
}

// Refinement options: defaults <- config file <- explicit flags.
struct RefineFlags {
  std::string config_path;
  double node_ratio = 0.5;
  double volume_ratio = 0.5;
  double pers_ratio = 0.5;
  bool use_knee = false;
  bool self_mode = false;
};

void add_refine(CLI::App* cmd, RefineFlags& r) {
  cmd->add_option("--refine", r.config_path,
                  "JSON refinement config {node_ratio, volume_ratio, pers_ratio, "
                  "use_knee, self_mode}");
  cmd->add_option("--node-ratio", r.node_ratio, "Subtree size ratio threshold");
  cmd->add_option("--volume-ratio", r.volume_ratio, "Subtree volume ratio threshold");
  cmd->add_option("--pers-ratio", r.pers_ratio, "Aggregate persistence ratio threshold");
  cmd->add_flag("--use-knee", r.use_knee, "Derive thresholds from the pair-count knee");
  cmd->add_flag("--self-mode", r.self_mode,
                "Self comparison: drop identical and nested pairs");
}

mtl_refine_options resolve_refine(const CLI::App* cmd, const RefineFlags& r) {
  mtl_refine_options o;
  mtl_refine_defaults(&o);
  if (!r.config_path.empty()) {
    std::ifstream in(r.config_path);
    if (!in) die(1, "cannot open '" + r.config_path + "'");
    ordered_json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      die(3, "bad refinement config '" + r.config_path + "': " + e.what());
    }
    if (!j.is_object()) die(3, "refinement config must be a JSON object");
    if (j.contains("node_ratio")) o.node_ratio = j["node_ratio"].get<double>();
    if (j.contains("volume_ratio")) o.volume_ratio = j["volume_ratio"].get<double>();
    if (j.contains("pers_ratio")) o.pers_ratio = j["pers_ratio"].get<double>();
    if (j.contains("use_knee")) o.use_knee = j["use_knee"].get<bool>() ? 1 : 0;
    if (j.contains("self_mode")) o.self_mode = j["self_mode"].get<bool>() ? 1 : 0;
  }
  if (cmd->count("--node-ratio")) o.node_ratio = r.node_ratio;
  if (cmd->count("--volume-ratio")) o.volume_ratio = r.volume_ratio;
  if (cmd->count("--pers-ratio")) o.pers_ratio = r.pers_ratio;
  if (cmd->count("--use-knee")) o.use_knee = r.use_knee ? 1 : 0;
  if (cmd->count("--self-mode")) o.self_mode = r.self_mode ? 1 : 0;
  return o;
}

ordered_json refine_config_json(const mtl_refine_options& o) {
  ordered_json j;
  j["node_ratio"] = o.node_ratio;
  j["volume_ratio"] = o.volume_ratio;
  j["pers_ratio"] = o.pers_ratio;
  j["use_knee"] = o.use_knee != 0;
  j["self_mode"] = o.self_mode != 0;
  return j;
}

bool parse_pair(const std::string& s, double& lo, double& hi) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return false;
  try {
    lo = std::stod(s.substr(0, colon));
    hi = std::stod(s.substr(colon + 1));
  } catch (...) {
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> argv_copy(argv, argv + argc);

  CLI::App app{
      "mtl: merge trees of scalar fields and local merge tree edit distances"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mtl_version()));

  // -- tree ---------------------------------------------------------------
  auto* cmd_tree = app.add_subcommand("tree", "Build a merge tree and segmentation");
  std::string tree_field;
  Common tree_opts;
  std::string seg_out;
  cmd_tree->add_option("field", tree_field, "Input scalar field")->required();
  add_common(cmd_tree, tree_opts, 0.0, true);
  cmd_tree->add_option("--seg-out", seg_out,
                       "Segmentation output path (default: <out stem>.seg)");

  // -- mted ---------------------------------------------------------------
  auto* cmd_mted = app.add_subcommand("mted", "Merge tree edit distance between two fields");
  std::string mted_a, mted_b, trace_out;
  Common mted_opts;
  cmd_mted->add_option("field_a", mted_a, "First scalar field")->required();
  cmd_mted->add_option("field_b", mted_b, "Second scalar field")->required();
  add_common(cmd_mted, mted_opts, 0.0, true);
  cmd_mted->add_option("--trace", trace_out, "Write the edit trace as JSON");

  // -- lmted --------------------------------------------------------------
  auto* cmd_lmted =
      app.add_subcommand("lmted", "Local distance matrix over all subtree pairs");
  std::string lmted_a, lmted_b, heatmap_out, range_str = "0:0.1";
  Common lmted_opts;
  RefineFlags lmted_refine;
  cmd_lmted->add_option("field_a", lmted_a, "First scalar field")->required();
  cmd_lmted->add_option("field_b", lmted_b, "Second scalar field")->required();
  add_common(cmd_lmted, lmted_opts, 0.0, true);
  add_refine(cmd_lmted, lmted_refine);
  cmd_lmted->add_option("--heatmap", heatmap_out, "Write a PPM heatmap of the matrix");
  cmd_lmted->add_option("--range", range_str, "Heatmap color range lo:hi")
      ->capture_default_str();

  // -- symmetry -----------------------------------------------------------
  auto* cmd_sym =
      app.add_subcommand("symmetry", "Detect repeating subtrees via self comparison");
  std::string sym_field;
  Common sym_opts;
  RefineFlags sym_refine;
  double tau = 0.01;
  cmd_sym->add_option("field", sym_field, "Input scalar field")->required();
  add_common(cmd_sym, sym_opts, 0.01, true);
  add_refine(cmd_sym, sym_refine);
  cmd_sym->add_option("--tau", tau, "Similarity threshold on local distances")
      ->capture_default_str();

  // -- track --------------------------------------------------------------
  auto* cmd_track =
      app.add_subcommand("track", "Track features across a time series of fields");
  std::vector<std::string> track_fields;
  Common track_opts;
  RefineFlags track_refine;
  double overlap_min = 0.02, min_weight = 3.0, tau_sym = 0.01;
  std::int64_t min_len = 10, top_k = 0;
  std::string order = "weight", query_str;
  cmd_track->add_option("fields", track_fields, "Scalar fields, one per timestep")
      ->required()
      ->expected(-2);
  add_common(cmd_track, track_opts, 0.008, true);
  add_refine(cmd_track, track_refine);
  cmd_track->add_option("--overlap-min", overlap_min, "Minimum region overlap for edges")
      ->capture_default_str();
  cmd_track->add_option("--min-len", min_len, "Minimum track length")
      ->capture_default_str();
  cmd_track->add_option("--min-weight", min_weight, "Minimum track weight")
      ->capture_default_str();
  cmd_track->add_option("--top-k", top_k, "Number of tracks to extract (0 = all)")
      ->capture_default_str();
  cmd_track->add_option("--order", order, "Track ranking: weight or length")
      ->capture_default_str();
  cmd_track->add_option("--query", query_str,
                        "Track a single feature given as t:root, expanding its "
                        "symmetry group");
  cmd_track->add_option("--tau", tau_sym, "Symmetry threshold for --query")
      ->capture_default_str();

  // -- region-compare -------------------------------------------------------
  auto* cmd_region = app.add_subcommand(
      "region-compare", "Match subtrees with identical regions and report distances");
  std::string region_a, region_b;
  Common region_opts;
  cmd_region->add_option("field_a", region_a, "First scalar field")->required();
  cmd_region->add_option("field_b", region_b, "Second scalar field")->required();
  add_common(cmd_region, region_opts, 0.0, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 3;
  }

  if (cmd_tree->parsed()) {
    TreePtr t = build_tree(tree_field, tree_opts);
    std::string seg = seg_out;
    if (seg.empty()) {
      seg = tree_opts.out;
      if (seg.size() > 5 && seg.substr(seg.size() - 5) == ".json")
        seg.resize(seg.size() - 5);
      seg += ".seg";
    }
    check(mtl_tree_save_json(t.get(), tree_opts.out.c_str()));
    check(mtl_tree_save_segmentation(t.get(), seg.c_str()));
    ordered_json cfg = common_config(tree_opts);
    cfg["seg_out"] = seg;
    write_manifest(tree_opts.out, argv_copy, cfg, {tree_field}, t0);
    return 0;
  }

  if (cmd_mted->parsed()) {
    TreePtr a = build_tree(mted_a, mted_opts);
    TreePtr b = build_tree(mted_b, mted_opts);
    double d = 0.0;
    std::string trace_json;
    if (!trace_out.empty()) {
      char* raw = nullptr;
      check(mtl_mted_trace_json(a.get(), b.get(), &d, &raw));
      trace_json = raw;
      mtl_string_free(raw);
    } else {
      check(mtl_mted(a.get(), b.get(), &d));
    }
    write_text(mted_opts.out, fmt_double(d) + "\n");
    if (!trace_out.empty()) write_text(trace_out, trace_json);
    std::cout << fmt_double(d) << "\n";
    ordered_json cfg = common_config(mted_opts);
    cfg["trace"] = trace_out;
    write_manifest(mted_opts.out, argv_copy, cfg, {mted_a, mted_b}, t0);
    return 0;
  }

  if (cmd_lmted->parsed()) {
    double lo = 0.0, hi = 0.1;
    if (!parse_pair(range_str, lo, hi)) die(3, "bad --range, expected lo:hi");
    const mtl_refine_options ropts = resolve_refine(cmd_lmted, lmted_refine);
    TreePtr a = build_tree(lmted_a, lmted_opts);
    TreePtr b = build_tree(lmted_b, lmted_opts);
    mtl_matrix* raw = nullptr;
    check(mtl_lmted(a.get(), b.get(), &ropts, &raw));
    MatrixPtr m(raw);
    check(mtl_matrix_save_csv(m.get(), lmted_opts.out.c_str()));
    check(mtl_matrix_save_meta(m.get(), (lmted_opts.out + ".meta.json").c_str()));
    if (!heatmap_out.empty())
      check(mtl_matrix_save_heatmap(m.get(), heatmap_out.c_str(), lo, hi));
    ordered_json cfg = common_config(lmted_opts);
    cfg["refine"] = refine_config_json(ropts);
    cfg["heatmap"] = heatmap_out;
    cfg["range"] = range_str;
    write_manifest(lmted_opts.out, argv_copy, cfg, {lmted_a, lmted_b}, t0);
    return 0;
  }

  if (cmd_sym->parsed()) {
    mtl_refine_options ropts = resolve_refine(cmd_sym, sym_refine);
    ropts.self_mode = 1;  // self comparison by construction
    TreePtr t = build_tree(sym_field, sym_opts);
    mtl_matrix* raw = nullptr;
    check(mtl_lmted(t.get(), t.get(), &ropts, &raw));
    MatrixPtr m(raw);
    char* json_raw = nullptr;
    check(mtl_symmetry_groups_json(m.get(), tau, &json_raw));
    std::string groups = json_raw;
    mtl_string_free(json_raw);
    write_text(sym_opts.out, groups);
    ordered_json cfg = common_config(sym_opts);
    cfg["refine"] = refine_config_json(ropts);
    cfg["tau"] = tau;
    write_manifest(sym_opts.out, argv_copy, cfg, {sym_field}, t0);
    return 0;
  }

  if (cmd_track->parsed()) {
    std::sort(track_fields.begin(), track_fields.end());  // timesteps = filename order
    std::int64_t query_t = -1, query_root = -1;
    if (!query_str.empty()) {
      double qt = 0, qr = 0;
      if (!parse_pair(query_str, qt, qr)) die(3, "bad --query, expected t:root");
      query_t = static_cast<std::int64_t>(qt);
      query_root = static_cast<std::int64_t>(qr);
    }
    const mtl_refine_options ropts = resolve_refine(cmd_track, track_refine);
    std::vector<TreePtr> trees;
    std::vector<const mtl_tree*> handles;
    for (const auto& f : track_fields) {
      trees.push_back(build_tree(f, track_opts));
      handles.push_back(trees.back().get());
    }
    mtl_tracks* raw = nullptr;
    check(mtl_tracks_build(handles.data(), static_cast<std::int64_t>(handles.size()),
                           &ropts, overlap_min, &raw));
    TracksPtr g(raw);
    if (query_t >= 0)
      check(mtl_tracks_query(g.get(), query_t, query_root, tau_sym));
    else
      check(mtl_tracks_top(g.get(), order.c_str(), min_len, min_weight, top_k));
    check(mtl_tracks_save_json(g.get(), track_opts.out.c_str()));
    ordered_json cfg = common_config(track_opts);
    cfg["refine"] = refine_config_json(ropts);
    cfg["overlap_min"] = overlap_min;
    cfg["min_len"] = min_len;
    cfg["min_weight"] = min_weight;
    cfg["top_k"] = top_k;
    cfg["order"] = order;
    cfg["query"] = query_str;
    cfg["tau"] = tau_sym;
    write_manifest(track_opts.out, argv_copy, cfg, track_fields, t0);
    return 0;
  }

  if (cmd_region->parsed()) {
    TreePtr a = build_tree(region_a, region_opts);
    TreePtr b = build_tree(region_b, region_opts);
    char* raw = nullptr;
    check(mtl_region_compare_csv(a.get(), b.get(), &raw));
    std::string csv = raw;
    mtl_string_free(raw);
    write_text(region_opts.out, csv);
    write_manifest(region_opts.out, argv_copy, common_config(region_opts),
                   {region_a, region_b}, t0);
    return 0;
  }

  return 0;
}
