/* C interface to the stochsym library.
 *
 * Handles are opaque. Functions return SS_OK or an error status; the message of
 * the last failure on the calling thread is available from ss_last_error().
 * Strings returned through char** are owned by the caller (ss_string_free).
 *
 * Commands never fail for mathematical reasons: a failed check, or an error
 * inside the pipeline, is a report with pass = 0 and the error in its body.
 * Command functions return a non-OK status only for bad arguments. */
#ifndef STOCHSYM_STOCHSYM_H
#define STOCHSYM_STOCHSYM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SS_API __declspec(dllexport)
#else
#define SS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ss_status {
  SS_OK = 0,
  SS_ERR_PARSE,
  SS_ERR_UNKNOWN_VARIABLE,
  SS_ERR_DOMAIN,
  SS_ERR_DIMENSION,
  SS_ERR_INVARIANT,
  SS_ERR_PHI_ZERO,
  SS_ERR_MONOTONICITY,
  SS_ERR_INVERSION,
  SS_ERR_SINGULAR_JACOBIAN,
  SS_ERR_COMPATIBILITY,
  SS_ERR_NON_INTEGRABLE,
  SS_ERR_COV_MISMATCH,
  SS_ERR_STAGE_FAILURE,
  SS_ERR_UNSUPPORTED,
  SS_ERR_DEGENERATE_SAMPLING,
  SS_ERR_TOO_FEW_PATHS,
  SS_ERR_INCREMENT_MISMATCH,
  SS_ERR_BETA_Y_DEPENDENCE,
  SS_ERR_IO,
  SS_ERR_USAGE,
  SS_ERR_INTERNAL
} ss_status;

typedef enum ss_format { SS_FORMAT_TEXT = 0, SS_FORMAT_JSON = 1 } ss_format;

typedef struct ss_model ss_model;
typedef struct ss_report ss_report;

typedef struct ss_options {
  uint64_t seed;  /* 42 */
  double tol;     /* 1e-8 */
  int points;     /* 200 */
  int threads;    /* 0: hardware concurrency */
} ss_options;

typedef struct ss_validate_options {
  const char* map;
  const ss_model* reduced; /* NULL: transform of the model by map */
  const double* dts;       /* NULL: 1e-2, 5e-3, 2.5e-3, 1.25e-3 */
  size_t n_dts;
  double T;
  double t0;
  int paths;
  const double* y0; /* NULL: centre of the x box */
  size_t n_y0;
  int law; /* KS test of the reduced scalar equation */
  int law_paths;
  double law_dt;
  int export_paths;
} ss_validate_options;

SS_API const char* ss_version(void);
SS_API const char* ss_last_error(void);
SS_API const char* ss_status_name(ss_status status);
/* 0 pass, 1 fail, 2 usage or I/O error */
SS_API int ss_status_exit_code(ss_status status);
SS_API void ss_string_free(char* s);

SS_API void ss_options_default(ss_options* opts);
SS_API void ss_validate_options_default(ss_validate_options* opts);

SS_API ss_status ss_model_load(const char* path, ss_model** out);
SS_API ss_status ss_model_parse(const char* text, const char* source, ss_model** out);
SS_API ss_status ss_model_render(const ss_model* model, char** out);
SS_API ss_status ss_model_save(const ss_model* model, const char* path);
SS_API ss_status ss_model_dims(const ss_model* model, int* n, int* m);
SS_API void ss_model_free(ss_model* model);

SS_API ss_status ss_check(const ss_model* model, const char* symmetry, const ss_options* opts, ss_report** out);
/* each basis string lists the n coefficients separated by ';' */
SS_API ss_status ss_search(const ss_model* model, const char* const* basis, size_t n_basis, int random,
                           const ss_options* opts, ss_report** out);
SS_API ss_status ss_compat(const ss_model* model, const char* symmetry, const ss_options* opts, ss_report** out);
SS_API ss_status ss_transform(const ss_model* model, const char* map, int backward, const ss_options* opts,
                              ss_report** out);
SS_API ss_status ss_build_map(const ss_model* model, const char* symmetry, const char* name,
                              const ss_options* opts, ss_report** out);
SS_API ss_status ss_reduce(const ss_model* model, const char* const* chain, size_t n_chain, const char* const* maps,
                           size_t n_maps, const ss_options* opts, ss_report** out);
SS_API ss_status ss_integrate(const ss_model* model, const char* symmetry, const ss_options* opts, ss_report** out);
SS_API ss_status ss_validate(const ss_model* model, const ss_validate_options* v, const ss_options* opts,
                             ss_report** out);
/* runs <dir>/manifest.json; all cases when n_names is 0 */
SS_API ss_status ss_fixtures(const char* dir, const char* const* names, size_t n_names, const ss_options* opts,
                             ss_report** out);

SS_API int ss_report_pass(const ss_report* report);
SS_API int ss_report_exit_code(const ss_report* report);
SS_API ss_status ss_report_render(const ss_report* report, ss_format format, char** out);
SS_API int ss_report_has_model(const ss_report* report);
SS_API ss_status ss_report_save_model(const ss_report* report, const char* path);
SS_API int ss_report_has_ensemble(const ss_report* report);
/* columnar text unless binary != 0 */
SS_API ss_status ss_report_save_ensemble(const ss_report* report, const char* path, int binary);
SS_API void ss_report_free(ss_report* report);

#ifdef __cplusplus
}
#endif

#endif
