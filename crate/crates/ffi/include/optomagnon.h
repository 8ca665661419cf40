#ifndef OPTOMAGNON_H
#define OPTOMAGNON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Index of the light–magnon pair in entanglement outputs.
#define OM_PAIR_LIGHT_MAGNON 0

// Index of the light–microwave pair in entanglement outputs.
#define OM_PAIR_LIGHT_MICROWAVE 1

// Index of the microwave–magnon pair in entanglement outputs.
#define OM_PAIR_MICROWAVE_MAGNON 2

// Status codes returned by every fallible function.
typedef enum OmStatus {
  OM_STATUS_OK = 0,
  // A required pointer argument was null.
  OM_STATUS_NULL_POINTER = 1,
  // String argument was not valid UTF-8, or a numeric argument was out
  // of range.
  OM_STATUS_INVALID_ARGUMENT = 2,
  // Unknown key, malformed config text or invalid parameter value.
  OM_STATUS_CONFIG = 3,
  // The operating point has no steady state.
  OM_STATUS_UNSTABLE = 4,
  // Linear algebra failure (non-convergence, singular system).
  OM_STATUS_NUMERICAL = 5,
  // Covariance matrix violates the uncertainty principle.
  OM_STATUS_NON_PHYSICAL = 6,
  // Internal panic caught at the boundary.
  OM_STATUS_INTERNAL = 7,
} OmStatus;

// Opaque parameter set. Create with [`om_params_new`] or
// [`om_params_from_config`], release with [`om_params_free`].
typedef struct OmParams OmParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or an empty
// string. The pointer stays valid until the next call into this library
// from the same thread.
const char *om_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *om_version(void);

// New handle holding the baseline operating point. Never returns null.
struct OmParams *om_params_new(void);

// Parses flat `key = value` config text into a new handle.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum OmStatus om_params_from_config(const char *text, struct OmParams **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `p` must come from this library and not be used afterwards.
void om_params_free(struct OmParams *p);

// Sets one config key. `delta_over_2pi_hz` sets Δ_a = −Δ_b. The handle is
// left unchanged if the resulting parameter set is invalid.
//
// # Safety
// `p` must be a live handle and `key` a NUL-terminated string.
enum OmStatus om_params_set(struct OmParams *p, const char *key, double value);

// Reads one physical parameter key in external units.
//
// # Safety
// `p` must be a live handle, `key` a NUL-terminated string and `out` valid.
enum OmStatus om_params_get(const struct OmParams *p, const char *key, double *out);

// Stationary 6×6 covariance matrix, row-major into `out_cov[36]`, mode
// order magnon, optical, microwave with (X, Y) per mode.
// `out_max_real_eig` (nullable) receives the largest drift eigenvalue real
// part in units of 2π × 1 MHz, also when the call returns `Unstable`.
//
// # Safety
// `p` must be a live handle; `out_cov` must hold 36 doubles.
enum OmStatus om_steady_state(const struct OmParams *p, double *out_cov, double *out_max_real_eig);

// Logarithmic negativity for the three mode pairs into `out_en[3]`,
// indexed by the `OM_PAIR_*` constants.
//
// # Safety
// `p` must be a live handle; `out_en` must hold 3 doubles.
enum OmStatus om_entanglement(const struct OmParams *p, double *out_en);

// Logarithmic negativity of a two-mode covariance matrix given row-major
// in `cov[16]`, ordering (x1, p1, x2, p2), vacuum variance 1/2. States
// violating the uncertainty principle return `NonPhysical`.
//
// # Safety
// `cov` must hold 16 doubles and `out_en` must be valid.
enum OmStatus om_log_negativity(const double *cov, double *out_en);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPTOMAGNON_H */
