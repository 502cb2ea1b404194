/* C interface to the abcpet library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns an abcpet_status; on failure the message of
 * the last error on the calling thread is available from
 * abcpet_last_error_message(). Parameter arrays always use the order
 * R1, k2, k2a, gamma, tD, tP, alpha.
 */
#ifndef ABCPET_H
#define ABCPET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ABCPET_API __declspec(dllexport)
#else
#define ABCPET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum abcpet_status {
  ABCPET_OK = 0,
  ABCPET_INVALID_ARGUMENT = 1,
  ABCPET_FORMAT_ERROR = 2,
  ABCPET_IO_ERROR = 3,
  ABCPET_SINGULAR_STEP = 4,
  ABCPET_NEGATIVE_ACTIVITY = 5,
  ABCPET_DEGENERATE_FIT = 6,
  ABCPET_KIND_MISMATCH = 7,
  ABCPET_MISSING_CONTEXT = 8,
  ABCPET_RANK_DEFICIENT = 9,
  ABCPET_NO_VALID_FIT = 10,
  ABCPET_EMPTY_POSTERIOR = 11,
  ABCPET_GRID_MISMATCH = 12,
  ABCPET_INTERNAL = 13
} abcpet_status;

typedef enum abcpet_summary {
  ABCPET_S1_SPLINE = 0,
  ABCPET_S2_RAW = 1,
  ABCPET_S3_SCALED = 2,
  ABCPET_S4_WLS = 3
} abcpet_summary;

typedef struct abcpet_params {
  double R1, k2, k2a, gamma, tD, tP, alpha;
} abcpet_params;

/* Uniform box; index 5 holds tP as the fraction of its conditional range
 * (tD + tp_offset, tp_max]. */
typedef struct abcpet_box {
  double lo[7];
  double hi[7];
  double tp_offset;
  double tp_max;
} abcpet_box;

typedef struct abcpet_grid abcpet_grid;
typedef struct abcpet_input abcpet_input;
typedef struct abcpet_tac abcpet_tac;
typedef struct abcpet_cache abcpet_cache;
typedef struct abcpet_posterior abcpet_posterior;

ABCPET_API const char* abcpet_version(void);
ABCPET_API const char* abcpet_last_error_message(void);
ABCPET_API const char* abcpet_status_name(abcpet_status status);
/* Process exit code for a status: 0 ok, 2 usage, 3 data, 4 numeric. */
ABCPET_API int abcpet_exit_code(abcpet_status status);

/* Time grids. */
ABCPET_API abcpet_status abcpet_grid_uniform(size_t n_frames, double frame_minutes,
                                             double sub_step, abcpet_grid** out);
ABCPET_API abcpet_status abcpet_grid_create(const double* t_start, const double* t_end,
                                            size_t n_frames, double sub_step,
                                            abcpet_grid** out);
ABCPET_API size_t abcpet_grid_frame_count(const abcpet_grid* grid);
ABCPET_API void abcpet_grid_free(abcpet_grid* grid);

/* Reference-region inputs: the built-in curve
 * amplitude t^power (exp(-fast_rate t) + slow_weight exp(-slow_rate t)), or a file. */
ABCPET_API abcpet_status abcpet_input_reference(double amplitude, double power, double fast_rate,
                                                double slow_weight, double slow_rate,
                                                abcpet_input** out);
ABCPET_API abcpet_status abcpet_input_from_file(const char* path, abcpet_input** out);
/* Arterial input exp(-rate t) for t >= 0. */
ABCPET_API abcpet_status abcpet_input_exponential(double rate, abcpet_input** out);
ABCPET_API double abcpet_input_eval(const abcpet_input* input, double t);
ABCPET_API void abcpet_input_free(abcpet_input* input);

/* Time-activity curves. */
ABCPET_API abcpet_status abcpet_tac_create(const abcpet_grid* grid, const double* values,
                                           size_t n, abcpet_tac** out);
ABCPET_API abcpet_status abcpet_tac_read_csv(const char* path, double sub_step, abcpet_tac** out);
ABCPET_API abcpet_status abcpet_tac_write_csv(const abcpet_tac* tac, const char* path);
ABCPET_API size_t abcpet_tac_frame_count(const abcpet_tac* tac);
ABCPET_API abcpet_status abcpet_tac_values(const abcpet_tac* tac, double* out, size_t n);
ABCPET_API void abcpet_tac_free(abcpet_tac* tac);

/* Models and noise. */
ABCPET_API abcpet_status abcpet_forward(const abcpet_params* theta, const abcpet_input* cr,
                                        const abcpet_grid* grid, abcpet_tac** out);
ABCPET_API abcpet_status abcpet_one_tissue_forward(double K1, double k2, const abcpet_input* ca,
                                                   const abcpet_grid* grid, abcpet_tac** out);
/* Scaled Poisson noise with `scale` counts per unit; scale <= 0 is invalid. */
ABCPET_API abcpet_status abcpet_poisson(const abcpet_tac* tac, double scale, uint64_t seed,
                                        abcpet_tac** out);
/* Number of lp-ntPET forward solves performed by this process. */
ABCPET_API uint64_t abcpet_forward_count(void);

ABCPET_API void abcpet_box_default_priors(abcpet_box* out);
ABCPET_API void abcpet_box_reference(abcpet_box* out);

/* Simulation caches. */
ABCPET_API abcpet_status abcpet_cache_build(size_t n, const abcpet_box* box,
                                            const abcpet_input* cr, const abcpet_grid* grid,
                                            const abcpet_summary* kinds, size_t n_kinds,
                                            uint64_t seed, abcpet_cache** out);
ABCPET_API abcpet_status abcpet_cache_save(const abcpet_cache* cache, const char* path);
ABCPET_API abcpet_status abcpet_cache_load(const char* path, abcpet_cache** out);
ABCPET_API size_t abcpet_cache_size(const abcpet_cache* cache);
ABCPET_API abcpet_status abcpet_cache_theta(const abcpet_cache* cache, size_t i,
                                            abcpet_params* out);
ABCPET_API void abcpet_cache_free(abcpet_cache* cache);

/* Rejection ABC against a cache. s3_scale_hint is only used for S3. */
ABCPET_API abcpet_status abcpet_abc_best_k(const abcpet_cache* cache, const abcpet_tac* obs,
                                           const abcpet_input* cr, abcpet_summary kind,
                                           double s3_scale_hint, size_t k,
                                           abcpet_posterior** out);
ABCPET_API abcpet_status abcpet_abc_reject(const abcpet_cache* cache, const abcpet_tac* obs,
                                           const abcpet_input* cr, abcpet_summary kind,
                                           double s3_scale_hint, double epsilon,
                                           abcpet_posterior** out);
ABCPET_API size_t abcpet_posterior_size(const abcpet_posterior* posterior);
ABCPET_API abcpet_status abcpet_posterior_sample(const abcpet_posterior* posterior, size_t i,
                                                 abcpet_params* theta, double* distance);
ABCPET_API abcpet_status abcpet_posterior_mean(const abcpet_posterior* posterior,
                                               abcpet_params* out);
ABCPET_API abcpet_status abcpet_posterior_write_jsonl(const abcpet_posterior* posterior,
                                                      const char* path);
ABCPET_API void abcpet_posterior_free(abcpet_posterior* posterior);

/* WLS basis-function fit with `library_size` timings drawn from the default
 * priors under `seed`. */
ABCPET_API abcpet_status abcpet_wls_fit(const abcpet_tac* obs, const abcpet_input* cr,
                                        size_t library_size, uint64_t seed, int nonneg,
                                        abcpet_params* out);

/* Runs a pipeline command ("simulate", "cache", "abc", "wls", "mcmc",
 * "narrow", "ppc", "batch-compare") with a JSON config (NULL or "" for
 * defaults), writing artifacts into out_dir. */
ABCPET_API abcpet_status abcpet_run_command(const char* command, const char* config_json,
                                            const char* out_dir);

/* Fully resolved configuration as JSON; free with abcpet_string_free. */
ABCPET_API abcpet_status abcpet_resolve_config(const char* config_json, char** out);
ABCPET_API void abcpet_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* ABCPET_H */
