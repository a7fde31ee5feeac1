#ifndef RILAB_H
#define RILAB_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum RilabStatus {
  RILAB_STATUS_OK = 0,
  RILAB_STATUS_NULL_POINTER = 1,
  RILAB_STATUS_INVALID_ARGUMENT = 2,
  RILAB_STATUS_DIMENSION_MISMATCH = 3,
  RILAB_STATUS_OUT_OF_DOMAIN = 4,
  RILAB_STATUS_NOT_DIVISIBLE = 5,
  RILAB_STATUS_BLOWUP = 6,
  RILAB_STATUS_DEGENERATE_SAMPLES = 7,
  RILAB_STATUS_TOO_FEW_POINTS = 8,
  RILAB_STATUS_NOT_HURWITZ = 9,
  RILAB_STATUS_EXPERIMENT_INVALID = 10,
  /**
   * The caller's output buffer is shorter than required.
   */
  RILAB_STATUS_BUFFER_TOO_SMALL = 11,
  RILAB_STATUS_PANIC = 12,
} RilabStatus;

/**
 * Reference solution used by [`rilab_strong_error`].
 */
typedef enum RilabOracle {
  /**
   * Fine-grid Euler scheme of the limit equation.
   */
  RILAB_ORACLE_EULER = 0,
  /**
   * Closed-form solution; charged-particle models only.
   */
  RILAB_ORACLE_EXACT_CHARGED = 1,
} RilabOracle;

/**
 * Opaque result of a strong-error experiment.
 */
typedef struct RilabErrorReport RilabErrorReport;

/**
 * Opaque interaction model.
 */
typedef struct RilabModel RilabModel;

/**
 * Strong-error experiment settings. `h_list` and `p_list` are borrowed for
 * the duration of the call.
 */
typedef struct RilabExperimentConfig {
  double tau;
  const double *h_list;
  size_t n_h;
  size_t n_paths;
  const double *p_list;
  size_t n_p;
  uint64_t master_seed;
  size_t oracle_refinement;
  /**
   * Oracle step; zero or negative selects `h_max / oracle_refinement`.
   */
  double oracle_step;
  double temperature;
} RilabExperimentConfig;

/**
 * One `(h, p)` estimate of a report.
 */
typedef struct RilabErrorRow {
  double h;
  double p;
  double error;
  double ci_low;
  double ci_high;
  size_t n_paths;
  size_t n_blowups;
} RilabErrorRow;

/**
 * Log-log regression of the error against `h`.
 */
typedef struct RilabFit {
  double slope;
  double intercept;
  double r_squared;
} RilabFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rilab_version(void);

/**
 * Message of the last failed call on this thread, or an empty string.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *rilab_last_error_message(void);

/**
 * Charged particle in a uniform field. Requires `mass > 0`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum RilabStatus rilab_model_charged(double charge, double mass, struct RilabModel **out);

/**
 * Harmonic pair with spring rest length `rest_length`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum RilabStatus rilab_model_harmonic(double rest_length, struct RilabModel **out);

/**
 * Damped oscillator. Requires `friction > 0` and `temperature >= 0`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum RilabStatus rilab_model_damped(double friction, double temperature, struct RilabModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from a `rilab_model_*` constructor and not be used afterwards.
 */
void rilab_model_free(struct RilabModel *model);

/**
 * Dimensions of the system state and of one environment increment.
 *
 * # Safety
 * `model` must be a live handle; the out-pointers must be writable.
 */
enum RilabStatus rilab_model_dims(const struct RilabModel *model,
                                  size_t *state_dim,
                                  size_t *noise_dim);

/**
 * One interaction `U(x, y)` at step `h`; writes `state_dim` values to `out`.
 *
 * # Safety
 * Pointers must reference arrays of at least the stated lengths.
 */
enum RilabStatus rilab_step(const struct RilabModel *model,
                            double h,
                            const double *x,
                            size_t x_len,
                            const double *y,
                            size_t y_len,
                            double *out,
                            size_t out_len);

/**
 * Runs the chain from `x0` over `n_steps` increments stored row-major in
 * `increments` (`n_steps * noise_dim` values). Writes the `n_steps + 1`
 * states, row-major, to `out`.
 *
 * # Safety
 * Pointers must reference arrays of at least the stated lengths.
 */
enum RilabStatus rilab_run_chain(const struct RilabModel *model,
                                 double h,
                                 const double *x0,
                                 size_t x0_len,
                                 const double *increments,
                                 size_t n_steps,
                                 double *out,
                                 size_t out_len);

/**
 * Deterministic Brownian increments of path `path_index`: `floor(horizon / step)`
 * rows of `dim` values, each `Normal(0, temperature * step)`. The number of
 * rows is written to `n_steps`.
 *
 * # Safety
 * `out` must hold `out_len` values; `n_steps` must be writable.
 */
enum RilabStatus rilab_sample_increments(uint64_t master_seed,
                                         uint64_t path_index,
                                         size_t dim,
                                         double step,
                                         double horizon,
                                         double temperature,
                                         double *out,
                                         size_t out_len,
                                         size_t *n_steps);

/**
 * Closed-form flow of the harmonic pair: `state` and `out` are `(Q1, P1, Q2, P2)`.
 *
 * # Safety
 * `state` and `out` must each reference 4 values.
 */
enum RilabStatus rilab_harmonic_exact_flow(const double *state,
                                           double rest_length,
                                           double t,
                                           double *out);

/**
 * Stationary covariance `C` of `dX = A X dt + Σ dW`, solving `A C + C Aᵀ + Σ Σᵀ = 0`.
 * `a` is `n × n`, `sigma` is `n × m`, `out` receives `n × n`; all row-major.
 *
 * # Safety
 * Pointers must reference arrays of the stated shapes.
 */
enum RilabStatus rilab_lyapunov_stationary(const double *a,
                                           size_t n,
                                           const double *sigma,
                                           size_t m,
                                           double *out);

/**
 * Strong sup-error experiment of `model` against `oracle`, started at `x0`.
 * On success `*out` receives a report handle to release with
 * [`rilab_report_free`].
 *
 * # Safety
 * `config` must be readable and its arrays valid; `out` must be writable.
 */
enum RilabStatus rilab_strong_error(const struct RilabModel *model,
                                    enum RilabOracle oracle,
                                    const struct RilabExperimentConfig *config,
                                    const double *x0,
                                    size_t x0_len,
                                    struct RilabErrorReport **out);

/**
 * Releases a report. Null is ignored.
 *
 * # Safety
 * `report` must come from [`rilab_strong_error`] and not be used afterwards.
 */
void rilab_report_free(struct RilabErrorReport *report);

/**
 * Number of `(h, p)` rows, ordered by `h` descending then `p` ascending.
 *
 * # Safety
 * `report` must be a live handle; `count` must be writable.
 */
enum RilabStatus rilab_report_row_count(const struct RilabErrorReport *report, size_t *count);

/**
 * Row `index` of the report.
 *
 * # Safety
 * `report` must be a live handle; `row` must be writable.
 */
enum RilabStatus rilab_report_row(const struct RilabErrorReport *report,
                                  size_t index,
                                  struct RilabErrorRow *row);

/**
 * Rate fit for exponent `p`. Fails with `TooFewPoints` when fewer than three
 * positive estimates were available.
 *
 * # Safety
 * `report` must be a live handle; `fit` must be writable.
 */
enum RilabStatus rilab_report_fit(const struct RilabErrorReport *report,
                                  double p,
                                  struct RilabFit *fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RILAB_H */
