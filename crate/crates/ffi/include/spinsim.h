#ifndef SPINSIM_H
#define SPINSIM_H

#include <stddef.h>
#include <stdint.h>

typedef enum SpinsimStatus {
  SPINSIM_STATUS_OK = 0,
  // Bad arguments, malformed JSON or an invalid configuration.
  SPINSIM_STATUS_INVALID_INPUT = 1,
  // The numerics failed for otherwise valid input.
  SPINSIM_STATUS_NUMERICAL_FAILURE = 2,
  SPINSIM_STATUS_NULL_POINTER = 3,
  // A Rust panic was caught at the boundary.
  SPINSIM_STATUS_INTERNAL = 4,
} SpinsimStatus;

// Opaque simulation model.
typedef struct SpinsimModel SpinsimModel;

typedef struct SpinsimRates {
  double gamma_s_mhz;
  double gamma_isc1_mhz;
  double gamma_isc2_mhz;
} SpinsimRates;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *spinsim_version(void);

// Message for the most recent failure on this thread, or an empty string.
//
// The pointer stays valid until the next spinsim call on the same thread.
const char *spinsim_last_error_message(void);

// Builds a model from a JSON configuration document.
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a writable pointer.
enum SpinsimStatus spinsim_model_from_json(const char *json, struct SpinsimModel **out);

// Builds one of the reference models: 0 for the singlet ground state,
// 1 for the triplet ground state.
//
// # Safety
// `out` must be a writable pointer.
enum SpinsimStatus spinsim_model_preset(uint32_t which, struct SpinsimModel **out);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must come from a `spinsim_model_*` constructor and not be freed twice.
void spinsim_model_free(struct SpinsimModel *model);

// Steady-state photon emission rate (MHz) at field `(bx, by, bz)`.
//
// # Safety
// `model` must be a live handle and `pl_mhz` writable.
enum SpinsimStatus spinsim_steady_pl(const struct SpinsimModel *model,
                                     double bx,
                                     double by,
                                     double bz,
                                     double *pl_mhz);

// g²(t) after a photon emission at field `(bx, by, bz)`, evaluated at
// `n` strictly increasing delays (seconds) into `values`.
//
// # Safety
// `delays` and `values` must each point to `n` doubles; `model` must be live.
enum SpinsimStatus spinsim_simulate_g2(const struct SpinsimModel *model,
                                       double bx,
                                       double by,
                                       double bz,
                                       const double *delays,
                                       size_t n,
                                       double *values);

// Three-level rate estimates from fitted antibunching time `tau1` and
// bunching time `tau2` (seconds), bunching amplitude `c2` and saturation
// parameter `x`.
//
// # Safety
// `out` must be writable.
enum SpinsimStatus spinsim_estimate_rates(double tau1,
                                          double tau2,
                                          double c2,
                                          double x,
                                          struct SpinsimRates *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINSIM_H */
