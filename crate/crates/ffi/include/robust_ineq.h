#ifndef ROBUST_INEQ_H
#define ROBUST_INEQ_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define RI_MEASURE_GINI 0

#define RI_MEASURE_THEIL 1

#define RI_MEASURE_GE 2

#define RI_ALTERNATIVE_TWO_SIDED 0

#define RI_ALTERNATIVE_GREATER 1

#define RI_ALTERNATIVE_LESS 2

typedef enum RiDegeneracy {
  RI_DEGENERACY_NONE = 0,
  RI_DEGENERACY_REJECTION = 1,
  RI_DEGENERACY_NON_REJECTION = 2,
} RiDegeneracy;

/**
 * Result code of every fallible call.
 */
typedef enum RiStatus {
  RI_STATUS_OK = 0,
  RI_STATUS_NULL_POINTER = 1,
  RI_STATUS_INVALID_ARGUMENT = 2,
  RI_STATUS_DOMAIN = 3,
  RI_STATUS_MOMENT_NONEXISTENT = 4,
  RI_STATUS_INSUFFICIENT_DATA = 5,
  RI_STATUS_DEGENERATE = 6,
  RI_STATUS_SINGULAR = 7,
  RI_STATUS_SPECIFICATION = 8,
  RI_STATUS_DATA = 9,
  RI_STATUS_IO = 10,
  RI_STATUS_PANIC = 11,
} RiStatus;

typedef enum RiValidity {
  RI_VALIDITY_GUARANTEED = 0,
  RI_VALIDITY_OUTSIDE_GUARANTEE = 1,
  RI_VALIDITY_NOT_APPLICABLE = 2,
} RiValidity;

/**
 * Opaque sample handle.
 */
typedef struct RiSample RiSample;

typedef struct RiEstimate {
  double value;
  double se;
  size_t n;
} RiEstimate;

/**
 * Outcome of a test. Absent quantities are NaN; `df` is -1 when the
 * reference distribution is not Student-t.
 */
typedef struct RiTestResult {
  double statistic;
  int32_t df;
  double alpha;
  double critical_value;
  double p_value;
  bool reject;
  double ci_lower;
  double ci_upper;
  enum RiValidity validity;
  enum RiDegeneracy degenerate;
  size_t warning_count;
} RiTestResult;

typedef struct RiTailEstimate {
  double zeta;
  double se;
  size_t k;
  double ci_lower;
  double ci_upper;
} RiTailEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ri_version(void);

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *ri_last_error(void);

/**
 * Copy `len` observations into a new sample handle. Observations must be
 * finite and non-negative; `values` may be null only when `len` is 0.
 *
 * # Safety
 * `values` must point to `len` readable doubles and `out` must be writable.
 */
enum RiStatus ri_sample_new(const double *values, size_t len, struct RiSample **out);

/**
 * Release a handle; null is ignored.
 *
 * # Safety
 * `s` must be null or a live handle from [`ri_sample_new`], not used again.
 */
void ri_sample_free(struct RiSample *s);

/**
 * Number of observations; 0 for null.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t ri_sample_len(const struct RiSample *s);

/**
 * Point estimate and asymptotic standard error.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum RiStatus ri_estimate(const struct RiSample *s,
                          uint32_t kind,
                          double ge_alpha,
                          struct RiEstimate *out);

/**
 * Group t-test of `H0: L = l0` with `q` groups.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum RiStatus ri_one_sample_test(const struct RiSample *s,
                                 uint32_t kind,
                                 double ge_alpha,
                                 size_t q,
                                 double l0,
                                 double alpha,
                                 uint32_t alt,
                                 struct RiTestResult *out);

/**
 * Group t-test of `H0: L_I - L_Y = d0` for independent samples.
 *
 * # Safety
 * `si`, `sy` must be live handles and `out` writable.
 */
enum RiStatus ri_two_sample_test(const struct RiSample *si,
                                 const struct RiSample *sy,
                                 uint32_t kind,
                                 double ge_alpha,
                                 size_t q1,
                                 size_t q2,
                                 double d0,
                                 double alpha,
                                 uint32_t alt,
                                 struct RiTestResult *out);

/**
 * Group t-test on paired group differences, `q` groups in each sample.
 *
 * # Safety
 * `si`, `sy` must be live handles and `out` writable.
 */
enum RiStatus ri_paired_difference_test(const struct RiSample *si,
                                        const struct RiSample *sy,
                                        uint32_t kind,
                                        double ge_alpha,
                                        size_t q,
                                        double d0,
                                        double alpha,
                                        uint32_t alt,
                                        struct RiTestResult *out);

/**
 * Two-sample test against the standard normal.
 *
 * # Safety
 * `si`, `sy` must be live handles and `out` writable.
 */
enum RiStatus ri_asymptotic_test(const struct RiSample *si,
                                 const struct RiSample *sy,
                                 uint32_t kind,
                                 double ge_alpha,
                                 double d0,
                                 double alpha,
                                 struct RiTestResult *out);

/**
 * Permutation test of equal indices with `resamples` random splits.
 *
 * # Safety
 * `si`, `sy` must be live handles and `out` writable.
 */
enum RiStatus ri_permutation_test(const struct RiSample *si,
                                  const struct RiSample *sy,
                                  uint32_t kind,
                                  double ge_alpha,
                                  double alpha,
                                  size_t resamples,
                                  uint64_t seed,
                                  struct RiTestResult *out);

/**
 * Bootstrap test of `H0: L_I - L_Y = d0` with `resamples` draws.
 *
 * # Safety
 * `si`, `sy` must be live handles and `out` writable.
 */
enum RiStatus ri_bootstrap_test(const struct RiSample *si,
                                const struct RiSample *sy,
                                uint32_t kind,
                                double ge_alpha,
                                double d0,
                                double alpha,
                                size_t resamples,
                                uint64_t seed,
                                struct RiTestResult *out);

/**
 * Rank-size tail index over the top `tail_fraction` of the sample, or over
 * the next block when `discard_top` is set.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum RiStatus ri_tail_index(const struct RiSample *s,
                            double tail_fraction,
                            bool discard_top,
                            struct RiTailEstimate *out);

/**
 * Population index of the Singh-Maddala distribution with shape `a`,
 * scale `b` and shape `c`.
 *
 * # Safety
 * `out` must be writable.
 */
enum RiStatus ri_sm_theoretical_index(double a,
                                      double b,
                                      double c,
                                      uint32_t kind,
                                      double ge_alpha,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBUST_INEQ_H */
