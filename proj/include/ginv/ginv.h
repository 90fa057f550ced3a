#ifndef GINV_H
#define GINV_H

/* C interface to the sparse generalized inverse library.
 *
 * Every function that can fail returns a ginv_status; GINV_OK is zero.
 * On failure a human-readable message is kept in thread-local storage and
 * stays valid until the same thread makes its next ginv_* call. Objects
 * returned through out-parameters are owned by the caller and released
 * with the matching *_free function; char* results are released with
 * ginv_string_free. Out-parameters are written only on GINV_OK.
 */

#include <stdint.h>

#ifndef GINV_API
#if defined(_WIN32)
#define GINV_API __declspec(dllexport)
#else
#define GINV_API __attribute__((visibility("default")))
#endif
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ginv_status {
  GINV_OK = 0,
  GINV_ERR_INVALID_ARGUMENT = 1,
  GINV_ERR_DIMENSION = 2,
  GINV_ERR_ZERO_MATRIX = 3,
  GINV_ERR_RANK = 4,
  GINV_ERR_CONFIG = 5,
  GINV_ERR_SIZE_CAP = 6,
  GINV_ERR_IO = 7,
  GINV_ERR_INTERNAL = 8,
  GINV_ERR_NOMEM = 9
} ginv_status;

typedef struct ginv_matrix ginv_matrix;
typedef struct ginv_options ginv_options;
typedef struct ginv_report ginv_report;

/* Random instance description: an m x n matrix of rank exactly r whose
 * factors have the given nonzero density, drawn from the given seed. */
typedef struct ginv_instance {
  int64_t m;
  int64_t n;
  int64_t r;
  double density;
  uint64_t seed;
} ginv_instance;

GINV_API const char* ginv_version(void);
GINV_API const char* ginv_status_name(ginv_status status);

/* Message from this thread's most recent failed call ("" when none). */
GINV_API const char* ginv_last_error(void);

GINV_API void ginv_string_free(char* s);

/* ---- matrices (dense, row-major exchange) ---- */

GINV_API ginv_status ginv_matrix_create(int64_t rows, int64_t cols,
                                        const double* row_major, /* NULL => zeros */
                                        ginv_matrix** out);
GINV_API void ginv_matrix_free(ginv_matrix* a);
GINV_API int64_t ginv_matrix_rows(const ginv_matrix* a);
GINV_API int64_t ginv_matrix_cols(const ginv_matrix* a);
GINV_API ginv_status ginv_matrix_copy_data(const ginv_matrix* a, double* out);
GINV_API ginv_status ginv_matrix_norm_fro(const ginv_matrix* a, double* out);

/* ".csv" reads/writes CSV; every other extension is Matrix Market. Writes
 * carry 17 significant digits, so a write/read round trip is bit exact. */
GINV_API ginv_status ginv_matrix_read(const char* path, ginv_matrix** out);
GINV_API ginv_status ginv_matrix_write(const char* path, const ginv_matrix* a);

GINV_API ginv_status ginv_generate(const ginv_instance* spec, ginv_matrix** out);

/* ---- options ----
 *
 * Keys and value formats (all values passed as strings):
 *   rank_tol, zero_tol, residual_tol          doubles; rank_tol < 0 = automatic
 *   rank_override                             integer, -1 = off
 *   max_iters, lp_size_cap, full_cap          integers
 *   solver_tol, gamma_scale, relaxation,
 *   budget_delta, time_cap_s                  doubles
 *   seed                                      unsigned integer
 *   trace_path                                string, per-iteration CSV
 *   ls_kappa                                  double, swap acceptance threshold
 *   ls_max_swaps, ls_refresh_every            integers
 *   ls_seed                                   unsigned integer
 *   ls_trace_path                             string, per-swap CSV
 *   cell_time_cap_s                           double, per-solve wall cap
 *   z_budget                                  double, fixes the p21l1 budget
 * Unknown keys and unparsable values are invalid-argument errors; range
 * checking happens when the options are used. */
GINV_API ginv_status ginv_options_create(ginv_options** out);
GINV_API void ginv_options_free(ginv_options* opts);
GINV_API ginv_status ginv_options_set(ginv_options* opts, const char* key,
                                      const char* value);

/* ---- solves ---- */

/* method: one of "p21", "p21l1", "p123", "p123full", "ls", "mp".
 * opts may be NULL for defaults; either out-parameter may be NULL.
 * Non-convergence is not an error: it is reported through the report's
 * status string ("optimal", "iter_limit", "infeasible", "timeout"). */
GINV_API ginv_status ginv_solve(const ginv_matrix* a, const char* method,
                                const ginv_options* opts, ginv_matrix** h_out,
                                ginv_report** report_out);

GINV_API ginv_status ginv_rank(const ginv_matrix* a, const ginv_options* opts,
                               int64_t* out);

/* Frobenius residuals of the four defining properties of the pair (a, h):
 * out[0] |AHA-A|, out[1] |HAH-H|, out[2] |(AH)^T-AH|, out[3] |(HA)^T-HA|. */
GINV_API ginv_status ginv_check(const ginv_matrix* a, const ginv_matrix* h,
                                double residuals_out[4]);

/* Writes the entrywise formulation as a fixed-format MPS file. kind must
 * name an LP-representable problem; currently that is "p123" only. */
GINV_API ginv_status ginv_export_lp(const ginv_matrix* a, const char* kind,
                                    const ginv_options* opts, const char* path);

/* ---- reports ---- */

GINV_API void ginv_report_free(ginv_report* rep);

/* Pointers stay valid for the lifetime of the report. */
GINV_API const char* ginv_report_status(const ginv_report* rep);
GINV_API const char* ginv_report_method(const ginv_report* rep);

/* name: one of m, n, r, nzr, norm0, norm1, norm21, rp1, rp2, rp3, rp4,
 * solve_time_s, total_time_s. Counts are returned as doubles. */
GINV_API ginv_status ginv_report_metric(const ginv_report* rep, const char* name,
                                        double* out);

/* Single-line JSON object with a fixed key order. */
GINV_API ginv_status ginv_report_json(const ginv_report* rep, char** out);

/* ---- benchmark harness ---- */

/* Runs every (instance, method) cell in the given order; cells that fail
 * report status "error:<code>" instead of aborting the suite. The
 * GINV_THREADS environment variable caps worker parallelism (default 1).
 * table_out receives a fixed-width text table and jsonl_out one JSON
 * object per cell per line; either may be NULL. */
GINV_API ginv_status ginv_bench(const ginv_instance* specs, int64_t n_specs,
                                const char* const* methods, int64_t n_methods,
                                const ginv_options* opts, char** table_out,
                                char** jsonl_out);

/* Solves each instance with "ls" and "p123" and reports
 * norm1(ls) / norm1(p123) per instance plus the worst case. The ratio is
 * guaranteed to stay within the instance rank; the run fails with
 * GINV_ERR_INTERNAL if it ever does not. */
GINV_API ginv_status ginv_ratio(const ginv_instance* specs, int64_t n_specs,
                                const ginv_options* opts, char** text_out);

#ifdef __cplusplus
}
#endif

#endif /* GINV_H */
