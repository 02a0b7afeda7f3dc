#ifndef MERMIN3_H
#define MERMIN3_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Mermin3Status {
  MERMIN3_STATUS_OK = 0,
  MERMIN3_STATUS_NULL_POINTER = 1,
  MERMIN3_STATUS_INVALID_ARGUMENT = 2,
  MERMIN3_STATUS_MALFORMED_INPUT = 3,
  MERMIN3_STATUS_IO = 4,
  MERMIN3_STATUS_PANIC = 5,
} Mermin3Status;

typedef enum Mermin3Classification {
  MERMIN3_CLASSIFICATION_CONSISTENT_WITH_LHV = 0,
  MERMIN3_CLASSIFICATION_VIOLATES_LHV_AND_BISEPARABLE_ORTHOGONAL = 1,
  MERMIN3_CLASSIFICATION_VIOLATES_BISEPARABLE_ANY_OBSERVABLES = 2,
} Mermin3Classification;

typedef enum Mermin3Class {
  MERMIN3_CLASS_FULL_SEPARABLE = 0,
  MERMIN3_CLASS_BISEP12_3 = 1,
  MERMIN3_CLASS_BISEP13_2 = 2,
  MERMIN3_CLASS_BISEP1_23 = 3,
  MERMIN3_CLASS_UNRESTRICTED = 4,
} Mermin3Class;

typedef enum Mermin3Functional {
  MERMIN3_FUNCTIONAL_MERMIN_FIXED = 0,
  MERMIN3_FUNCTIONAL_SIGMA_GENERAL = 1,
} Mermin3Functional;

/**
 * `<M3>` or a Σ combination with fixed settings.
 */
typedef struct Mermin3BellOperator Mermin3BellOperator;

/**
 * A loaded correlation record.
 */
typedef struct Mermin3Record Mermin3Record;

/**
 * A three-qubit state, pure or mixed.
 */
typedef struct Mermin3State Mermin3State;

typedef struct Mermin3Estimate {
  double value;
  double std_error;
} Mermin3Estimate;

typedef struct Mermin3Verdict {
  double estimate;
  double std_error;
  /**
   * May be ±infinity when the standard error is zero.
   */
  double sigma_above_2;
  double sigma_above_2sqrt2;
  enum Mermin3Classification classification;
} Mermin3Verdict;

typedef struct Mermin3Optimum {
  double best_value;
  size_t best_restart;
  size_t iterations;
} Mermin3Optimum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mermin3_version(void);

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *mermin3_last_error(void);

/**
 * # Safety
 * `out` must be writable.
 */
enum Mermin3Status mermin3_state_ghz(struct Mermin3State **out);

/**
 * White-noise GHZ with visibility in [0, 1].
 *
 * # Safety
 * `out` must be writable.
 */
enum Mermin3Status mermin3_state_noisy_ghz(double visibility, struct Mermin3State **out);

/**
 * Pure state from `len` amplitudes split into real and imaginary parts.
 * `im` may be NULL for real amplitudes. The vector must have unit norm.
 *
 * # Safety
 * `re` (and `im` when non-NULL) must point to `len` readable doubles.
 */
enum Mermin3Status mermin3_state_from_amplitudes(const double *re,
                                                 const double *im,
                                                 size_t len,
                                                 struct Mermin3State **out);

/**
 * # Safety
 * `state` must be NULL or a handle not yet freed.
 */
void mermin3_state_free(struct Mermin3State *state);

/**
 * # Safety
 * `out` must be writable.
 */
enum Mermin3Status mermin3_bell_mermin(struct Mermin3BellOperator **out);

/**
 * Σ operator from 18 doubles: unit Bloch vectors a, a', b, b', c, c'.
 *
 * # Safety
 * `bloch` must point to 18 readable doubles; `out` must be writable.
 */
enum Mermin3Status mermin3_bell_sigma(const double *bloch, struct Mermin3BellOperator **out);

/**
 * # Safety
 * `op` must be NULL or a handle not yet freed.
 */
void mermin3_bell_free(struct Mermin3BellOperator *op);

/**
 * # Safety
 * `state` and `op` must be live handles; `out` must be writable.
 */
enum Mermin3Status mermin3_bell_value(const struct Mermin3State *state,
                                      const struct Mermin3BellOperator *op,
                                      double *out);

/**
 * Loads a correlation file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum Mermin3Status mermin3_record_load(const char *path, struct Mermin3Record **out);

/**
 * Parses a correlation record from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum Mermin3Status mermin3_record_from_json(const char *json, struct Mermin3Record **out);

/**
 * Number of entries, or 0 for NULL.
 *
 * # Safety
 * `record` must be NULL or a live handle.
 */
size_t mermin3_record_len(const struct Mermin3Record *record);

/**
 * # Safety
 * `record` must be NULL or a handle not yet freed.
 */
void mermin3_record_free(struct Mermin3Record *record);

/**
 * `<M3>` from the four Mermin settings of a record, errors in quadrature.
 *
 * # Safety
 * `record` must be a live handle; `out` must be writable.
 */
enum Mermin3Status mermin3_estimate_m3(const struct Mermin3Record *record,
                                       struct Mermin3Estimate *out);

/**
 * Classifies an estimate against the default bounds 2 and 2√2 with
 * confidence multiplier `k`.
 *
 * # Safety
 * `out` must be writable.
 */
enum Mermin3Status mermin3_classify(double value,
                                    double std_error,
                                    double k,
                                    struct Mermin3Verdict *out);

/**
 * Simulates `shots` measurements of each Mermin setting and returns the
 * estimated correlations as a record.
 *
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum Mermin3Status mermin3_simulate_mermin(const struct Mermin3State *state,
                                           uint64_t shots,
                                           uint64_t seed,
                                           struct Mermin3Record **out);

/**
 * Multi-start maximization of the functional over a class. `best_state`
 * may be NULL; otherwise it receives a new handle to the maximizer.
 *
 * # Safety
 * `out` must be writable; `best_state`, when non-NULL, must be writable.
 */
enum Mermin3Status mermin3_optimize(enum Mermin3Class class_,
                                    enum Mermin3Functional functional,
                                    bool free_settings,
                                    size_t restarts,
                                    uint64_t seed,
                                    struct Mermin3Optimum *out,
                                    struct Mermin3State **best_state);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MERMIN3_H */
