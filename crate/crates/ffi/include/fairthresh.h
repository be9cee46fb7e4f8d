#ifndef FAIRTHRESH_H
#define FAIRTHRESH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FtStatus {
  FT_STATUS_OK = 0,
  FT_STATUS_NULL_POINTER = 1,
  /**
   * Malformed data (bad pmf, size mismatch, unknown enum value).
   */
  FT_STATUS_INVALID_INPUT = 2,
  /**
   * Well-formed instance that violates a solver precondition.
   */
  FT_STATUS_PRECONDITION = 3,
  /**
   * Caller buffer too small; the needed length was written.
   */
  FT_STATUS_BUFFER_TOO_SMALL = 4,
  /**
   * Internal panic caught at the boundary.
   */
  FT_STATUS_INTERNAL = 5,
} FtStatus;

typedef enum FtCriterion {
  FT_CRITERION_MAX_UTIL = 0,
  FT_CRITERION_DEM_PARITY = 1,
  FT_CRITERION_EQ_OPT = 2,
} FtCriterion;

typedef enum FtGroup {
  FT_GROUP_A = 0,
  FT_GROUP_B = 1,
} FtGroup;

typedef enum FtCurve {
  FT_CURVE_OUTCOME = 0,
  FT_CURVE_UTILITY = 1,
} FtCurve;

/**
 * Opaque two-group instance.
 */
typedef struct FtInstance FtInstance;

/**
 * Opaque solver output.
 */
typedef struct FtResult FtResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Instance with affine utility `gain*rho + loss*(1-rho)` and affine
 * score change `outcome_gain*rho + outcome_penalty*(1-rho)`.
 *
 * # Safety
 * The four arrays must hold `size` doubles; `out` must be writable.
 */
enum FtStatus ft_instance_new_affine(size_t size,
                                     const double *pmf_a,
                                     const double *rho_a,
                                     const double *pmf_b,
                                     const double *rho_b,
                                     double share_a,
                                     double utility_gain,
                                     double utility_loss,
                                     double outcome_gain,
                                     double outcome_penalty,
                                     struct FtInstance **out);

/**
 * Instance with per-score utility and score-change tables shared by both
 * groups.
 *
 * # Safety
 * All six arrays must hold `size` doubles; `out` must be writable.
 */
enum FtStatus ft_instance_new_tables(size_t size,
                                     const double *pmf_a,
                                     const double *rho_a,
                                     const double *pmf_b,
                                     const double *rho_b,
                                     double share_a,
                                     const double *utility,
                                     const double *outcome,
                                     struct FtInstance **out);

/**
 * # Safety
 * `inst` must come from `ft_instance_new_*` and not be freed twice.
 */
void ft_instance_free(struct FtInstance *inst);

/**
 * # Safety
 * `inst` must be a live instance handle; `out` must be writable.
 */
enum FtStatus ft_solve(const struct FtInstance *inst, uint32_t criterion, struct FtResult **out);

/**
 * Soft demographic parity with penalty `lambda * |beta_A - beta_B|`.
 *
 * # Safety
 * `inst` must be a live instance handle; `out` must be writable.
 */
enum FtStatus ft_solve_soft(const struct FtInstance *inst, double lambda, struct FtResult **out);

/**
 * Best mean-score change for each group, giving up at most `budget`
 * utility relative to MaxUtil.
 *
 * # Safety
 * `inst` must be a live instance handle; `out` must be writable.
 */
enum FtStatus ft_solve_outcome_based(const struct FtInstance *inst,
                                     double budget,
                                     struct FtResult **out);

/**
 * # Safety
 * `res` must come from a solve call and not be freed twice.
 */
void ft_result_free(struct FtResult *res);

/**
 * Canonical selection rate, mean-score change and utility of one group.
 *
 * # Safety
 * `res` must be a live result handle; output pointers may be null to skip.
 */
enum FtStatus ft_result_group(const struct FtResult *res,
                              uint32_t group,
                              double *rate,
                              double *outcome,
                              double *utility);

/**
 * Threshold form of one group's policy: everyone above `cutoff` (1-based)
 * is selected, a `gamma` fraction at `cutoff`.
 *
 * # Safety
 * `res` must be a live result handle; both outputs must be writable.
 */
enum FtStatus ft_result_threshold(const struct FtResult *res,
                                  uint32_t group,
                                  size_t *cutoff,
                                  double *gamma);

/**
 * Share-weighted utility of the result.
 *
 * # Safety
 * `res` must be a live result handle; `out` must be writable.
 */
enum FtStatus ft_result_total_utility(const struct FtResult *res, double *out);

/**
 * Breakpoints of a group's outcome or utility curve over selection rates.
 * Writes the breakpoint count to `len`; returns `BufferTooSmall` without
 * touching `xs`/`ys` when `capacity` is less than that.
 *
 * # Safety
 * `xs` and `ys` must hold `capacity` doubles (may be null when
 * `capacity` is 0); `len` must be writable.
 */
enum FtStatus ft_curve(const struct FtInstance *inst,
                       uint32_t group,
                       uint32_t kind,
                       double *xs,
                       double *ys,
                       size_t capacity,
                       size_t *len);

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *ft_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAIRTHRESH_H */
