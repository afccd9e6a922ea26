/* mtlocal: merge trees of scalar fields and local merge tree edit distances.
 *
 * C API over the core library: opaque handles, integer status codes, and a
 * thread-local error message readable via mtl_last_error(). All functions
 * return MTL_OK (0) on success unless documented otherwise.
 */
#ifndef MTLOCAL_H
#define MTLOCAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MTL_API __declspec(dllexport)
#else
#define MTL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mtl_status {
  MTL_OK = 0,
  MTL_ERR_IO = 1,
  MTL_ERR_VALIDATION = 2,
  MTL_ERR_CONFIG = 3,
  MTL_ERR_ARGUMENT = 4
} mtl_status;

MTL_API const char* mtl_version(void);
MTL_API const char* mtl_last_error(void);

typedef struct mtl_grid mtl_grid;
typedef struct mtl_tree mtl_tree;
typedef struct mtl_matrix mtl_matrix;
typedef struct mtl_tracks mtl_tracks;

MTL_API void mtl_string_free(char* s);

/* ---- scalar grids ------------------------------------------------------ */

/* format: "auto", "ascii", "raw_f32", "raw_f64". */
MTL_API mtl_status mtl_grid_load(const char* path, const char* format, mtl_grid** out);
MTL_API mtl_status mtl_grid_create(const int64_t* dims, int32_t ndims,
                                   const double* values, mtl_grid** out);
MTL_API mtl_status mtl_grid_save(const mtl_grid* g, const char* path, const char* format);
MTL_API mtl_status mtl_grid_normalize(const mtl_grid* g, mtl_grid** out);
MTL_API int32_t mtl_grid_ndims(const mtl_grid* g);
MTL_API int64_t mtl_grid_dim(const mtl_grid* g, int32_t axis);
MTL_API int64_t mtl_grid_size(const mtl_grid* g);
MTL_API const double* mtl_grid_values(const mtl_grid* g);
MTL_API void mtl_grid_free(mtl_grid* g);

/* ---- merge trees ------------------------------------------------------- */

/* variant: "split" or "join"; simplify in [0,1) as a fraction of the range. */
MTL_API mtl_status mtl_tree_build(const mtl_grid* g, const char* variant,
                                  double simplify, mtl_tree** out);
MTL_API int64_t mtl_tree_node_count(const mtl_tree* t);
MTL_API mtl_status mtl_tree_save_json(const mtl_tree* t, const char* path);
MTL_API mtl_status mtl_tree_save_segmentation(const mtl_tree* t, const char* path);
MTL_API void mtl_tree_free(mtl_tree* t);

/* ---- distances --------------------------------------------------------- */

MTL_API mtl_status mtl_mted(const mtl_tree* a, const mtl_tree* b, double* out);
MTL_API mtl_status mtl_mted_trace_json(const mtl_tree* a, const mtl_tree* b,
                                       double* out, char** trace_json);

/* Ratios in [0,1]; negative means "library default" (0.5). */
typedef struct mtl_refine_options {
  double node_ratio;
  double volume_ratio;
  double pers_ratio;
  int32_t use_knee;
  int32_t self_mode;
} mtl_refine_options;

MTL_API void mtl_refine_defaults(mtl_refine_options* opts);

MTL_API mtl_status mtl_lmted(const mtl_tree* a, const mtl_tree* b,
                             const mtl_refine_options* opts, mtl_matrix** out);
MTL_API int64_t mtl_matrix_rows(const mtl_matrix* m);
MTL_API int64_t mtl_matrix_cols(const mtl_matrix* m);
MTL_API int64_t mtl_matrix_row_root(const mtl_matrix* m, int64_t row);
MTL_API int64_t mtl_matrix_col_root(const mtl_matrix* m, int64_t col);
/* Writes the entry and returns MTL_OK, or leaves *out alone and returns
 * MTL_ERR_ARGUMENT for out-of-range indices; *present reports pruning. */
MTL_API mtl_status mtl_matrix_get(const mtl_matrix* m, int64_t row, int64_t col,
                                  double* out, int32_t* present);
MTL_API mtl_status mtl_matrix_save_csv(const mtl_matrix* m, const char* path);
MTL_API mtl_status mtl_matrix_save_meta(const mtl_matrix* m, const char* path);
MTL_API mtl_status mtl_matrix_save_heatmap(const mtl_matrix* m, const char* path,
                                           double lo, double hi);
MTL_API void mtl_matrix_free(mtl_matrix* m);

/* ---- analysis ---------------------------------------------------------- */

/* Groups of mutually similar subtrees in a self comparison, as JSON. */
MTL_API mtl_status mtl_symmetry_groups_json(const mtl_matrix* self_dm, double tau,
                                            char** json_out);

MTL_API mtl_status mtl_tracks_build(const mtl_tree* const* trees, int64_t count,
                                    const mtl_refine_options* opts, double overlap_min,
                                    mtl_tracks** out);
/* order: "weight" or "length". Extracted tracks are stored on the handle. */
MTL_API mtl_status mtl_tracks_top(mtl_tracks* g, const char* order, int64_t min_len,
                                  double min_weight, int64_t k);
MTL_API mtl_status mtl_tracks_query(mtl_tracks* g, int64_t timestep, int64_t root,
                                    double tau_sym);
MTL_API mtl_status mtl_tracks_save_json(const mtl_tracks* g, const char* path);
MTL_API int64_t mtl_tracks_count(const mtl_tracks* g);
MTL_API void mtl_tracks_free(mtl_tracks* g);

/* Subtree pairs with identical regions plus their local distances, as CSV. */
MTL_API mtl_status mtl_region_compare_csv(const mtl_tree* a, const mtl_tree* b,
                                          char** csv_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MTLOCAL_H */
