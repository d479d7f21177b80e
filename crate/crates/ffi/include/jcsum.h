#ifndef JCSUM_H
#define JCSUM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum JcStatus {
  JC_STATUS_OK = 0,
  JC_STATUS_NULL_POINTER = 1,
  JC_STATUS_INVALID_PARAMETER = 2,
  JC_STATUS_DOMAIN = 3,
  JC_STATUS_NO_CONVERGENCE = 4,
  JC_STATUS_QUADRATURE = 5,
  JC_STATUS_IMAGINARY_RESIDUAL = 6,
  JC_STATUS_WRONG_BRANCH = 7,
  JC_STATUS_BRANCH_JUMP = 8,
  JC_STATUS_INVALID_PATH = 9,
  JC_STATUS_INTERPOLATION_GAP = 10,
  JC_STATUS_IO = 11,
  JC_STATUS_PANIC = 12,
} JcStatus;

/**
 * How saddle contributions are combined.
 */
typedef enum JcPolicy {
  JC_POLICY_SUM = 0,
  JC_POLICY_MAX = 1,
} JcPolicy;

/**
 * Coherent-state model: amplitude, detuning and photon weights.
 */
typedef struct JcModel JcModel;

/**
 * Traced saddle trajectories for one model.
 */
typedef struct JcSaddles JcSaddles;

/**
 * Contour quadrature result.
 */
typedef struct JcContourValue {
  double value;
  double error_estimate;
  double imag_residual;
  size_t nodes;
} JcContourValue;

typedef struct JcComplex {
  double re;
  double im;
} JcComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *jc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *jc_version(void);

/**
 * Creates a model with amplitude `alpha > 0` and scaled detuning `nu >= 0`.
 *
 * # Safety
 * `out` must be valid for writes. The handle is released by [`jc_model_free`].
 */
enum JcStatus jc_model_new(double alpha, double nu, struct JcModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from [`jc_model_new`] and not be used afterwards.
 */
void jc_model_free(struct JcModel *model);

/**
 * Time-independent part of the exact sum.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writes.
 */
enum JcStatus jc_static_part(const struct JcModel *model, double *out);

/**
 * Exact inversion at `t` (λt units).
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writes.
 */
enum JcStatus jc_inversion_exact(const struct JcModel *model, double t, double *out);

/**
 * Exact inversion on `n` times; `times` and `out` hold `n` values.
 *
 * # Safety
 * `model` must be a live handle, `times` valid for `n` reads and `out` for
 * `n` writes.
 */
enum JcStatus jc_inversion_exact_many(const struct JcModel *model,
                                      const double *times,
                                      size_t n,
                                      double *out);

/**
 * Hankel-contour quadrature of the inversion at `t` with the default path.
 * For `nu > 0` this is the unit-weight sum, without the static part.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writes.
 */
enum JcStatus jc_inversion_contour(const struct JcModel *model,
                                   double t,
                                   struct JcContourValue *out);

/**
 * Traces saddle trajectories `branches[0..n]` up to time `t_max`.
 *
 * # Safety
 * `model` must be a live handle, `branches` valid for `n` reads and `out`
 * for writes. The handle is released by [`jc_saddles_free`].
 */
enum JcStatus jc_saddles_new(const struct JcModel *model,
                             const int32_t *branches,
                             size_t n,
                             double t_max,
                             struct JcSaddles **out);

/**
 * Releases traced trajectories. Null is ignored.
 *
 * # Safety
 * `saddles` must come from [`jc_saddles_new`] and not be used afterwards.
 */
void jc_saddles_free(struct JcSaddles *saddles);

/**
 * Saddle-point inversion at `t`, without the static part.
 *
 * # Safety
 * `model` and `saddles` must be live handles, with `saddles` traced for
 * `model`, and `out` valid for writes.
 */
enum JcStatus jc_inversion_saddle(const struct JcModel *model,
                                  const struct JcSaddles *saddles,
                                  double t,
                                  enum JcPolicy policy,
                                  double *out);

/**
 * `W_k(u)`; `conjugate` selects the mirrored branch `conj(W_k(conj u))`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum JcStatus jc_lambert_w(int32_t k, bool conjugate, struct JcComplex u, struct JcComplex *out);

/**
 * Solution `w` of `w (ν + e^{2w})^{1/2} = ±u` continued from `W_k` at `ν = 0`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum JcStatus jc_generalized_lambert(int32_t k,
                                     struct JcComplex u,
                                     double nu,
                                     struct JcComplex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JCSUM_H */
