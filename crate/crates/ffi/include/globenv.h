#ifndef GLOBENV_H
#define GLOBENV_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from the globenv-ffi crate. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GeStatus {
  GE_STATUS_OK = 0,
  GE_STATUS_INVALID_INPUT = 1,
  GE_STATUS_DEGENERATE_DATA = 2,
  GE_STATUS_RESOURCE = 3,
  GE_STATUS_NULL_POINTER = 4,
  GE_STATUS_BUFFER_TOO_SMALL = 5,
  GE_STATUS_INTERNAL = 6,
} GeStatus;

typedef enum GeOutlier {
  GE_OUTLIER_NONE = 0,
  GE_OUTLIER_INTEGRAL = 1,
  GE_OUTLIER_MAXIMUM = 2,
} GeOutlier;

typedef enum GeMeasure {
  GE_MEASURE_RANK = 0,
  GE_MEASURE_ERL = 1,
  GE_MEASURE_CONT = 2,
  GE_MEASURE_AREA = 3,
  GE_MEASURE_QDIR = 4,
} GeMeasure;

/**
 * Opaque curve set.
 */
typedef struct GeCurveSet GeCurveSet;

/**
 * Opaque envelope together with its central curve and per-curve verdicts.
 */
typedef struct GeEnvelope GeEnvelope;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ge_version(void);

/**
 * Message of the last failed call on this thread; empty when none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *ge_last_error_message(void);

/**
 * Copies `s * d` row-major values into a new curve set.
 *
 * `grid` may be NULL, in which case the grid is `k / d`, `k = 1..d`.
 *
 * # Safety
 * `values` must point to `s * d` readable doubles, `grid` (when not NULL) to
 * `d` doubles, and `out` must be writable.
 */
enum GeStatus ge_curveset_new(const double *values,
                              size_t s,
                              size_t d,
                              const double *grid,
                              struct GeCurveSet **out);

/**
 * Simulates `s` curves at resolution `d` (a divisor of 2500), adding the
 * chosen outlier to curve 1.
 *
 * # Safety
 * `out` must be writable.
 */
enum GeStatus ge_simulate(size_t s,
                          size_t d,
                          double scale,
                          enum GeOutlier outlier,
                          uint64_t seed,
                          struct GeCurveSet **out);

/**
 * # Safety
 * `set` must be NULL or a handle from this library that has not been freed.
 */
void ge_curveset_free(struct GeCurveSet *set);

/**
 * # Safety
 * `set` must be a live handle.
 */
size_t ge_curveset_num_curves(const struct GeCurveSet *set);

/**
 * # Safety
 * `set` must be a live handle.
 */
size_t ge_curveset_num_points(const struct GeCurveSet *set);

/**
 * Copies the row-major values into `out`, which must hold `s * d` doubles.
 *
 * # Safety
 * `set` must be a live handle and `out` must point to `len` writable doubles.
 */
enum GeStatus ge_curveset_values(const struct GeCurveSet *set, double *out, size_t len);

/**
 * Writes the `s` measure values (smaller = more extreme) into `out`.
 * `beta` is the qdir tail probability and is ignored by the other measures.
 *
 * # Safety
 * `set` must be a live handle and `out` must point to `len` writable doubles.
 */
enum GeStatus ge_measure(const struct GeCurveSet *set,
                         enum GeMeasure measure,
                         double beta,
                         double *out,
                         size_t len);

/**
 * Builds the global envelope at level `alpha`.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum GeStatus ge_envelope_new(const struct GeCurveSet *set,
                              enum GeMeasure measure,
                              double alpha,
                              double beta,
                              struct GeEnvelope **out);

/**
 * # Safety
 * `env` must be NULL or a handle from this library that has not been freed.
 */
void ge_envelope_free(struct GeEnvelope *env);

/**
 * Critical value `m_(alpha)`; NaN for a NULL handle.
 *
 * # Safety
 * `env` must be NULL or a live handle.
 */
double ge_envelope_crit(const struct GeEnvelope *env);

/**
 * Copies lower and upper bounds, and the central curve when `central` is not NULL.
 *
 * # Safety
 * `env` must be a live handle; each non-NULL buffer must hold `len` doubles.
 */
enum GeStatus ge_envelope_bounds(const struct GeEnvelope *env,
                                 double *lower,
                                 double *upper,
                                 double *central,
                                 size_t len);

/**
 * Writes 1 for every curve outside the envelope (`M_i < m_(alpha)`), else 0.
 *
 * # Safety
 * `env` must be a live handle and `out` must hold `len` bytes.
 */
enum GeStatus ge_envelope_extreme(const struct GeEnvelope *env, uint8_t *out, size_t len);

/**
 * Tests whether curve 1 is among the `alpha s` most extreme curves.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum GeStatus ge_detect_first(const struct GeCurveSet *set,
                              enum GeMeasure measure,
                              double alpha,
                              bool *out);

/**
 * 95% Wilson score interval for `detections` out of `reps`.
 *
 * # Safety
 * `lo` and `hi` must be writable.
 */
enum GeStatus ge_wilson_ci(size_t detections, size_t reps, double *lo, double *hi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLOBENV_H */
