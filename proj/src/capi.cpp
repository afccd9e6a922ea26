#include "mtlocal.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtlocal/analysis.hpp"
#include "mtlocal/edit_distance.hpp"
#include "mtlocal/errors.hpp"
#include "mtlocal/local_distance.hpp"
#include "mtlocal/scalar_grid.hpp"
#include "mtlocal/serialize.hpp"

namespace {

thread_local std::string g_last_error;

template <typename Fn>
mtl_status wrap(Fn&& fn) {
  try {
    fn();
    return MTL_OK;
  } catch (const mtl::IoError& e) {
    g_last_error = e.what();
    return MTL_ERR_IO;
  } catch (const mtl::ConfigError& e) {
    g_last_error = e.what();
    return MTL_ERR_CONFIG;
  } catch (const mtl::ValidationError& e) {
    g_last_error = e.what();
    return MTL_ERR_VALIDATION;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MTL_ERR_VALIDATION;
  }
}

mtl_status fail_argument(const std::string& msg) {
  g_last_error = msg;
  return MTL_ERR_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct mtl_grid {
  mtl::ScalarGrid grid;
};

struct mtl_tree {
  std::shared_ptr<mtl::TreeContext> ctx;
  std::vector<std::int64_t> dims;
};

struct mtl_matrix {
  mtl::DistanceMatrix dm;
};

struct mtl_tracks {
  std::vector<std::shared_ptr<mtl::TreeContext>> contexts;
  mtl::RefinementConfig cfg;
  double overlap_min = 0.0;
  mtl::TrackGraph graph;
};

namespace {

mtl::RefinementConfig to_config(const mtl_refine_options* opts) {
  mtl::RefinementConfig cfg;
  if (!opts) return cfg;
  if (opts->node_ratio >= 0.0) cfg.node_ratio = opts->node_ratio;
  if (opts->volume_ratio >= 0.0) cfg.volume_ratio = opts->volume_ratio;
  if (opts->pers_ratio >= 0.0) cfg.pers_ratio = opts->pers_ratio;
  cfg.use_knee = opts->use_knee != 0;
  cfg.self_mode = opts->self_mode != 0;
  return cfg;
}

}  // namespace

extern "C" {

const char* mtl_version(void) { return "0.1.0"; }

const char* mtl_last_error(void) { return g_last_error.c_str(); }

void mtl_string_free(char* s) { std::free(s); }

/* ---- scalar grids ------------------------------------------------------ */

mtl_status mtl_grid_load(const char* path, const char* format, mtl_grid** out) {
  if (!path || !out) return fail_argument("mtl_grid_load: null argument");
  const std::string fmt = format ? format : "auto";
  return wrap([&] {
    mtl::FieldFormat f;
    if (fmt == "auto")
      f = mtl::detect_format(path);
    else if (fmt == "ascii")
      f = mtl::FieldFormat::ascii;
    else if (fmt == "raw_f32")
      f = mtl::FieldFormat::raw_f32;
    else if (fmt == "raw_f64")
      f = mtl::FieldFormat::raw_f64;
    else
      throw mtl::ConfigError("unknown field format '" + fmt + "'");
    auto g = std::make_unique<mtl_grid>();
    g->grid = mtl::load_field(path, f);
    *out = g.release();
  });
}

mtl_status mtl_grid_create(const int64_t* dims, int32_t ndims, const double* values,
                           mtl_grid** out) {
  if (!dims || !values || !out || ndims < 1)
    return fail_argument("mtl_grid_create: null or empty argument");
  return wrap([&] {
    auto g = std::make_unique<mtl_grid>();
    g->grid.dims.assign(dims, dims + ndims);
    g->grid.values.assign(values, values + g->grid.size());
    mtl::validate_grid(g->grid);
    *out = g.release();
  });
}

mtl_status mtl_grid_save(const mtl_grid* g, const char* path, const char* format) {
  if (!g || !path) return fail_argument("mtl_grid_save: null argument");
  const std::string fmt = format ? format : "ascii";
  return wrap([&] {
    mtl::FieldFormat f;
    if (fmt == "ascii")
      f = mtl::FieldFormat::ascii;
    else if (fmt == "raw_f32")
      f = mtl::FieldFormat::raw_f32;
    else if (fmt == "raw_f64")
      f = mtl::FieldFormat::raw_f64;
    else
      throw mtl::ConfigError("unknown field format '" + fmt + "'");
    mtl::save_field(g->grid, path, f);
  });
}

mtl_status mtl_grid_normalize(const mtl_grid* g, mtl_grid** out) {
  if (!g || !out) return fail_argument("mtl_grid_normalize: null argument");
  return wrap([&] {
    auto n = std::make_unique<mtl_grid>();
    n->grid = mtl::normalize_range(g->grid);
    *out = n.release();
  });
}

int32_t mtl_grid_ndims(const mtl_grid* g) { return g ? g->grid.ndims() : 0; }

int64_t mtl_grid_dim(const mtl_grid* g, int32_t axis) {
  if (!g || axis < 0 || axis >= g->grid.ndims()) return 0;
  return g->grid.dims[static_cast<std::size_t>(axis)];
}

int64_t mtl_grid_size(const mtl_grid* g) { return g ? g->grid.size() : 0; }

const double* mtl_grid_values(const mtl_grid* g) { return g ? g->grid.values.data() : nullptr; }

void mtl_grid_free(mtl_grid* g) { delete g; }

/* ---- merge trees ------------------------------------------------------- */

mtl_status mtl_tree_build(const mtl_grid* g, const char* variant, double simplify,
                          mtl_tree** out) {
  if (!g || !out) return fail_argument("mtl_tree_build: null argument");
  const std::string var = variant ? variant : "split";
  return wrap([&] {
    mtl::TreeVariant v;
    if (var == "split")
      v = mtl::TreeVariant::split;
    else if (var == "join")
      v = mtl::TreeVariant::join;
    else
      throw mtl::ConfigError("unknown tree variant '" + var + "'");
    auto t = std::make_unique<mtl_tree>();
    t->ctx = std::make_shared<mtl::TreeContext>(mtl::build_context(g->grid, v, simplify));
    t->dims = g->grid.dims;
    *out = t.release();
  });
}

int64_t mtl_tree_node_count(const mtl_tree* t) { return t ? t->ctx->tree.node_count() : 0; }

mtl_status mtl_tree_save_json(const mtl_tree* t, const char* path) {
  if (!t || !path) return fail_argument("mtl_tree_save_json: null argument");
  return wrap([&] { mtl::save_tree_json(*t->ctx, path); });
}

mtl_status mtl_tree_save_segmentation(const mtl_tree* t, const char* path) {
  if (!t || !path) return fail_argument("mtl_tree_save_segmentation: null argument");
  return wrap([&] { mtl::save_segmentation(t->ctx->seg, t->dims, path); });
}

void mtl_tree_free(mtl_tree* t) { delete t; }

/* ---- distances --------------------------------------------------------- */

mtl_status mtl_mted(const mtl_tree* a, const mtl_tree* b, double* out) {
  if (!a || !b || !out) return fail_argument("mtl_mted: null argument");
  return wrap([&] { *out = mtl::mted(*a->ctx, *b->ctx); });
}

mtl_status mtl_mted_trace_json(const mtl_tree* a, const mtl_tree* b, double* out,
                               char** trace_json) {
  if (!a || !b || !out || !trace_json)
    return fail_argument("mtl_mted_trace_json: null argument");
  return wrap([&] {
    mtl::EditTrace trace;
    *out = mtl::mted(*a->ctx, *b->ctx, &trace);
    nlohmann::ordered_json j;
    j["n1"] = trace.n1;
    j["n2"] = trace.n2;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (std::int64_t i = 0; i < trace.n1; ++i)
      for (std::int64_t jj = 0; jj < trace.n2; ++jj) {
        const auto& c = trace.cells[static_cast<std::size_t>(i * trace.n2 + jj)];
        nlohmann::ordered_json jc;
        jc["i"] = i;
        jc["j"] = jj;
        jc["tree_branch"] = c.tree_branch;
        jc["forest_branch"] = c.forest_branch;
        jc["matching"] = c.matching;
        cells.push_back(std::move(jc));
      }
    j["cells"] = std::move(cells);
    *trace_json = dup_string(j.dump(2) + "\n");
  });
}

void mtl_refine_defaults(mtl_refine_options* opts) {
  if (!opts) return;
  const mtl::RefinementConfig cfg;
  opts->node_ratio = cfg.node_ratio;
  opts->volume_ratio = cfg.volume_ratio;
  opts->pers_ratio = cfg.pers_ratio;
  opts->use_knee = cfg.use_knee ? 1 : 0;
  opts->self_mode = cfg.self_mode ? 1 : 0;
}

mtl_status mtl_lmted(const mtl_tree* a, const mtl_tree* b, const mtl_refine_options* opts,
                     mtl_matrix** out) {
  if (!a || !b || !out) return fail_argument("mtl_lmted: null argument");
  return wrap([&] {
    auto m = std::make_unique<mtl_matrix>();
    m->dm = mtl::lmted_all_pairs(*a->ctx, *b->ctx, to_config(opts));
    *out = m.release();
  });
}

int64_t mtl_matrix_rows(const mtl_matrix* m) { return m ? m->dm.rows() : 0; }

int64_t mtl_matrix_cols(const mtl_matrix* m) { return m ? m->dm.cols() : 0; }

int64_t mtl_matrix_row_root(const mtl_matrix* m, int64_t row) {
  if (!m || row < 0 || row >= m->dm.rows()) return -1;
  return m->dm.row_roots[static_cast<std::size_t>(row)];
}

int64_t mtl_matrix_col_root(const mtl_matrix* m, int64_t col) {
  if (!m || col < 0 || col >= m->dm.cols()) return -1;
  return m->dm.col_roots[static_cast<std::size_t>(col)];
}

mtl_status mtl_matrix_get(const mtl_matrix* m, int64_t row, int64_t col, double* out,
                          int32_t* present) {
  if (!m || !out || !present) return fail_argument("mtl_matrix_get: null argument");
  if (row < 0 || row >= m->dm.rows() || col < 0 || col >= m->dm.cols())
    return fail_argument("mtl_matrix_get: index out of range");
  const auto at = m->dm.at(row, col);
  *present = m->dm.present[at] ? 1 : 0;
  *out = m->dm.present[at] ? m->dm.value[at] : 0.0;
  return MTL_OK;
}

mtl_status mtl_matrix_save_csv(const mtl_matrix* m, const char* path) {
  if (!m || !path) return fail_argument("mtl_matrix_save_csv: null argument");
  return wrap([&] { mtl::save_matrix_csv(m->dm, path); });
}

mtl_status mtl_matrix_save_meta(const mtl_matrix* m, const char* path) {
  if (!m || !path) return fail_argument("mtl_matrix_save_meta: null argument");
  return wrap([&] { mtl::save_matrix_meta(m->dm, path); });
}

mtl_status mtl_matrix_save_heatmap(const mtl_matrix* m, const char* path, double lo,
                                   double hi) {
  if (!m || !path) return fail_argument("mtl_matrix_save_heatmap: null argument");
  return wrap([&] { mtl::save_matrix_heatmap(m->dm, path, lo, hi); });
}

void mtl_matrix_free(mtl_matrix* m) { delete m; }

/* ---- analysis ---------------------------------------------------------- */

mtl_status mtl_symmetry_groups_json(const mtl_matrix* self_dm, double tau, char** json_out) {
  if (!self_dm || !json_out) return fail_argument("mtl_symmetry_groups_json: null argument");
  return wrap([&] {
    const auto groups = mtl::symmetry_groups(self_dm->dm, tau);
    *json_out = dup_string(mtl::groups_to_json(groups, tau));
  });
}

mtl_status mtl_tracks_build(const mtl_tree* const* trees, int64_t count,
                            const mtl_refine_options* opts, double overlap_min,
                            mtl_tracks** out) {
  if (!trees || !out || count < 1) return fail_argument("mtl_tracks_build: null argument");
  for (int64_t k = 0; k < count; ++k)
    if (!trees[k]) return fail_argument("mtl_tracks_build: null tree handle");
  return wrap([&] {
    auto t = std::make_unique<mtl_tracks>();
    t->cfg = to_config(opts);
    t->overlap_min = overlap_min;
    std::vector<const mtl::TreeContext*> steps;
    for (int64_t k = 0; k < count; ++k) {
      t->contexts.push_back(trees[k]->ctx);
      steps.push_back(trees[k]->ctx.get());
    }
    std::vector<mtl::DistanceMatrix> dms;
    for (int64_t k = 0; k + 1 < count; ++k)
      dms.push_back(mtl::lmted_all_pairs(*steps[static_cast<std::size_t>(k)],
                                         *steps[static_cast<std::size_t>(k) + 1], t->cfg));
    t->graph = mtl::build_track_graph(steps, dms, overlap_min, t->cfg);
    *out = t.release();
  });
}

mtl_status mtl_tracks_top(mtl_tracks* g, const char* order, int64_t min_len,
                          double min_weight, int64_t k) {
  if (!g) return fail_argument("mtl_tracks_top: null argument");
  const std::string ord = order ? order : "weight";
  return wrap([&] {
    mtl::TrackOrder o;
    if (ord == "weight")
      o = mtl::TrackOrder::weight;
    else if (ord == "length")
      o = mtl::TrackOrder::length;
    else
      throw mtl::ConfigError("unknown track order '" + ord + "'");
    g->graph.tracks = mtl::top_tracks(g->graph, o, min_len, min_weight, k);
  });
}

mtl_status mtl_tracks_query(mtl_tracks* g, int64_t timestep, int64_t root, double tau_sym) {
  if (!g) return fail_argument("mtl_tracks_query: null argument");
  if (timestep < 0 || timestep >= static_cast<int64_t>(g->contexts.size()))
    return fail_argument("mtl_tracks_query: timestep out of range");
  return wrap([&] {
    mtl::RefinementConfig self_cfg = g->cfg;
    self_cfg.self_mode = true;
    const auto& ctx = *g->contexts[static_cast<std::size_t>(timestep)];
    const mtl::DistanceMatrix self_dm = mtl::lmted_all_pairs(ctx, ctx, self_cfg);
    g->graph.tracks = mtl::query_track(g->graph, self_dm, timestep, root, tau_sym);
  });
}

mtl_status mtl_tracks_save_json(const mtl_tracks* g, const char* path) {
  if (!g || !path) return fail_argument("mtl_tracks_save_json: null argument");
  return wrap([&] { mtl::write_text_file(path, mtl::track_graph_to_json(g->graph)); });
}

int64_t mtl_tracks_count(const mtl_tracks* g) {
  return g ? static_cast<int64_t>(g->graph.tracks.size()) : 0;
}

void mtl_tracks_free(mtl_tracks* g) { delete g; }

mtl_status mtl_region_compare_csv(const mtl_tree* a, const mtl_tree* b, char** csv_out) {
  if (!a || !b || !csv_out) return fail_argument("mtl_region_compare_csv: null argument");
  return wrap([&] {
    const auto rows = mtl::region_compare(*a->ctx, *b->ctx);
    *csv_out = dup_string(mtl::region_matches_to_csv(rows));
  });
}

} /* extern "C" */
