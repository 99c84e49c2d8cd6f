#ifndef ASTAR_PURSUIT_H
#define ASTAR_PURSUIT_H

/* Generated by cbindgen from astar-pursuit-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ApCostModel {
  AP_COST_MODEL_ADDITIVE = 0,
  AP_COST_MODEL_ADAPTIVE = 1,
  AP_COST_MODEL_MULTIPLICATIVE = 2,
} ApCostModel;

/**
 * Result of every fallible entry point.
 */
typedef enum ApStatus {
  AP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  AP_STATUS_NULL_ARGUMENT = 1,
  /**
   * Parameters violate their documented constraints.
   */
  AP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Array lengths do not agree.
   */
  AP_STATUS_DIMENSION_MISMATCH = 3,
  /**
   * Numerical failure (non-finite input, degenerate system).
   */
  AP_STATUS_NUMERICAL_FAILURE = 4,
} ApStatus;

typedef enum ApCoeffDist {
  AP_COEFF_DIST_UNIFORM = 0,
  AP_COEFF_DIST_GAUSSIAN = 1,
  AP_COEFF_DIST_BINARY = 2,
} ApCoeffDist;

typedef enum ApMatrixKind {
  AP_MATRIX_KIND_GAUSSIAN = 0,
  AP_MATRIX_KIND_BERNOULLI = 1,
} ApMatrixKind;

typedef enum ApTermination {
  AP_TERMINATION_COMPLETE_PATH = 0,
  AP_TERMINATION_RESIDUE_THRESHOLD = 1,
  AP_TERMINATION_ITERATION_CAP = 2,
  /**
   * Greedy baselines: the fixed iteration budget ran out.
   */
  AP_TERMINATION_FIXED_ITERATIONS = 3,
} ApTermination;

/**
 * Opaque recovery problem handle.
 */
typedef struct ApProblem ApProblem;

/**
 * Opaque recovery result handle.
 */
typedef struct ApResult ApResult;

/**
 * Tree-search knobs. `max_iterations == 0` selects the default cap and
 * `residue_stop <= 0` disables the residue-threshold early stop.
 */
typedef struct ApSearchParams {
  size_t initial_paths;
  size_t extensions;
  size_t beam_width;
  enum ApCostModel cost_model;
  double alpha;
  double beta;
  uint64_t max_iterations;
  double residue_stop;
  /**
   * Non-zero restricts equivalent-path pruning to live beam slots.
   */
  uint8_t live_slot_pruning;
} ApSearchParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Stock search parameters: I=3, B=2, P=200, multiplicative cost with
 * alpha 0.8 (beta 1.25 for the additive/adaptive models).
 */
struct ApSearchParams ap_search_params_default(void);

/**
 * Builds a problem from a row-major `rows x cols` observation matrix and an
 * observation vector of length `rows`.
 *
 * # Safety
 * `phi` must point to `rows * cols` doubles, `y` to `rows` doubles, and
 * `out` must be a valid destination pointer.
 */
enum ApStatus ap_problem_create(const double *phi,
                                size_t rows,
                                size_t cols,
                                const double *y,
                                size_t sparsity,
                                struct ApProblem **out);

/**
 * Generates a seeded synthetic problem (`K`-sparse signal, observation
 * matrix, optional noise at `snr_db`; pass NaN for a noiseless
 * observation). `stream` selects the trial stream, matching the library's
 * ensemble convention of trial `t` using stream `t + 1`.
 *
 * # Safety
 * `out` must be a valid destination pointer.
 */
enum ApStatus ap_problem_generate(size_t signal_len,
                                  size_t obs_len,
                                  size_t sparsity,
                                  enum ApCoeffDist dist,
                                  enum ApMatrixKind matrix,
                                  uint64_t seed,
                                  uint64_t stream,
                                  double snr_db,
                                  struct ApProblem **out);

/**
 * # Safety
 * `problem` must come from a constructor and not have been freed.
 */
void ap_problem_free(struct ApProblem *problem);

/**
 * Signal length `N` of a problem.
 *
 * # Safety
 * `problem` must be a live handle.
 */
size_t ap_problem_signal_len(const struct ApProblem *problem);

/**
 * Orthogonal matching pursuit with `K` iterations.
 *
 * # Safety
 * `problem` must be a live handle; `out` a valid destination.
 */
enum ApStatus ap_recover_omp(const struct ApProblem *problem, struct ApResult **out);

/**
 * Subspace pursuit.
 *
 * # Safety
 * `problem` must be a live handle; `out` a valid destination.
 */
enum ApStatus ap_recover_sp(const struct ApProblem *problem, struct ApResult **out);

/**
 * Best-first tree-search recovery.
 *
 * # Safety
 * `problem` must be a live handle; `out` a valid destination.
 */
enum ApStatus ap_recover_astar(const struct ApProblem *problem,
                               struct ApSearchParams params,
                               struct ApResult **out);

/**
 * # Safety
 * `result` must come from a recovery call and not have been freed.
 */
void ap_result_free(struct ApResult *result);

/**
 * Length of the recovered signal.
 *
 * # Safety
 * `result` must be a live handle.
 */
size_t ap_result_signal_len(const struct ApResult *result);

/**
 * Copies the recovered signal into `buf` (length `len >= signal length`).
 *
 * # Safety
 * `result` must be a live handle and `buf` must point to `len` doubles.
 */
enum ApStatus ap_result_copy_signal(const struct ApResult *result, double *buf, size_t len);

/**
 * Number of selected atoms.
 *
 * # Safety
 * `result` must be a live handle.
 */
size_t ap_result_support_len(const struct ApResult *result);

/**
 * Copies the selected atom indices (selection order) into `buf`.
 *
 * # Safety
 * `result` must be a live handle and `buf` must point to `len` entries.
 */
enum ApStatus ap_result_copy_support(const struct ApResult *result, size_t *buf, size_t len);

/**
 * # Safety
 * `result` must be a live handle.
 */
double ap_result_residue_norm(const struct ApResult *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
uint64_t ap_result_iterations(const struct ApResult *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
uint64_t ap_result_equivalent_prunes(const struct ApResult *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
enum ApTermination ap_result_termination(const struct ApResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASTAR_PURSUIT_H */
