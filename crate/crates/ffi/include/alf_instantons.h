#ifndef ALF_INSTANTONS_H
#define ALF_INSTANTONS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AlfStatus {
  ALF_STATUS_OK = 0,
  ALF_STATUS_NULL_POINTER = 1,
  ALF_STATUS_INVALID_UTF8 = 2,
  ALF_STATUS_PARSE = 3,
  ALF_STATUS_INVALID_PROFILE = 4,
  ALF_STATUS_DOMAIN = 5,
  ALF_STATUS_REGULARITY = 6,
  ALF_STATUS_PANIC = 99,
} AlfStatus;

/**
 * A three-turning-point parameter set `(p, q, a, b)`.
 */
typedef struct AlfParams AlfParams;

/**
 * A validated profile.
 */
typedef struct AlfProfile AlfProfile;

/**
 * Fields `V`, `F`, `e^{2nu}` at one point; `v` is `+inf` on the axis over
 * a zero-slope interval.
 */
typedef struct AlfFields {
  double v;
  double f;
  double e2nu;
  /**
   * Nonzero when the value is a numerical axis limit.
   */
  int32_t extrapolated;
} AlfFields;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the thread.
 */
const char *alf_last_error(void);

/**
 * Library version as a static string.
 */
const char *alf_version(void);

/**
 * Parses a profile from JSON `{"A": .., "turns": [{"z": .., "a": ..}, ..]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum AlfStatus alf_profile_from_json(const char *json, struct AlfProfile **out);

/**
 * Builds a named preset. `keys` and `values` hold `len` named parameters
 * (`m`, `n`, `a`, `b`, `p`, `A`); they may be null when `len` is 0.
 *
 * # Safety
 * `name` and each `keys[i]` must be NUL-terminated strings, `values` must
 * hold `len` doubles, and `out` must be writable.
 */
enum AlfStatus alf_profile_from_preset(const char *name,
                                       const char *const *keys,
                                       const double *values,
                                       size_t len,
                                       struct AlfProfile **out);

/**
 * # Safety
 * `profile` must come from this library and not be used afterwards.
 */
void alf_profile_free(struct AlfProfile *profile);

/**
 * Writes the profile as JSON into a new string.
 *
 * # Safety
 * `profile` must be a live handle and `out` writable.
 */
enum AlfStatus alf_profile_to_json(const struct AlfProfile *profile, char **out);

/**
 * Number of turning points.
 *
 * # Safety
 * `profile` must be a live handle or null (giving 0).
 */
size_t alf_profile_turn_count(const struct AlfProfile *profile);

/**
 * `f(z)`.
 *
 * # Safety
 * `profile` must be a live handle and `out` writable.
 */
enum AlfStatus alf_profile_eval(const struct AlfProfile *profile, double z, double *out);

/**
 * The harmonic potential `U` at `rho > 0`.
 *
 * # Safety
 * `profile` must be a live handle and `out` writable.
 */
enum AlfStatus alf_potential_eval(const struct AlfProfile *profile,
                                  double rho,
                                  double z,
                                  double *out);

/**
 * `V`, `F`, `e^{2nu}`; `rho = 0` evaluates the axis values.
 *
 * # Safety
 * `profile` must be a live handle and `out` writable.
 */
enum AlfStatus alf_fields_eval(const struct AlfProfile *profile,
                               double rho,
                               double z,
                               struct AlfFields *out);

/**
 * Finite-difference Ricci residual of the metric; `h <= 0` selects the
 * default step.
 *
 * # Safety
 * `profile` must be a live handle and `out` writable.
 */
enum AlfStatus alf_ricci_residual(const struct AlfProfile *profile,
                                  double rho,
                                  double z,
                                  double h,
                                  double *out);

/**
 * Parameter set from `(p, q, a, b)`; needs `p q != 0`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AlfStatus alf_params_new(double p, double q, double a, double b, struct AlfParams **out);

/**
 * # Safety
 * `params` must come from this library and not be used afterwards.
 */
void alf_params_free(struct AlfParams *params);

/**
 * The profile of a parameter set; fails when `A <= 0`.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum AlfStatus alf_params_profile(const struct AlfParams *params, struct AlfProfile **out);

/**
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum AlfStatus alf_nut_charge(const struct AlfParams *params, double *out);

/**
 * Regularity report as JSON; `tol` is the integer tolerance for the NUT
 * charge (`<= 0` selects `1e-9`). `regular` is set to 1 or 0.
 *
 * # Safety
 * `params` must be a live handle; `json` and `regular` must be writable
 * or null.
 */
enum AlfStatus alf_classify(const struct AlfParams *params,
                            double tol,
                            int32_t *regular,
                            char **json);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void alf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALF_INSTANTONS_H */
