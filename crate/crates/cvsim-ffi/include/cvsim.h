#ifndef CVSIM_H
#define CVSIM_H

/* Generated from the Rust sources; edit those instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Four-mode cluster layouts accepted by `cvsim_cluster4`.
 */
typedef enum {
  /**
   * Chain 1-2-3-4.
   */
  CVSIM_CLUSTER_LINEAR = 0,
  /**
   * Star with one three-neighbor hub.
   */
  CVSIM_CLUSTER_T_SHAPE = 1,
  /**
   * Four-cycle.
   */
  CVSIM_CLUSTER_DIAMOND = 2,
} CvsimClusterShape;

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum {
  /**
   * The call succeeded.
   */
  CVSIM_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CVSIM_ERR_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  CVSIM_ERR_INVALID_UTF8 = 2,
  /**
   * A numeric argument was outside its valid range.
   */
  CVSIM_ERR_INVALID_PARAMETER = 3,
  /**
   * The requested state or operation is not physical.
   */
  CVSIM_ERR_UNPHYSICAL = 4,
  /**
   * Circuit source failed to parse or compile.
   */
  CVSIM_ERR_PARSE = 5,
  /**
   * A buffer was too small for the requested data.
   */
  CVSIM_ERR_BUFFER_TOO_SMALL = 6,
  /**
   * The library panicked internally; the handle states are unchanged.
   */
  CVSIM_ERR_INTERNAL = 7,
} CvsimStatus;

/**
 * Opaque Gaussian state handle.
 */
typedef struct CvsimState CvsimState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message of the most recent error on this thread. The pointer
 * stays valid until the next failing call on the same thread. Never null.
 */
const char *cvsim_last_error(void);

/**
 * Creates an `n_modes`-mode vacuum state.
 *
 * # Safety
 * `out` must be a valid writable pointer.
 */
CvsimStatus cvsim_state_vacuum(uintptr_t n_modes, CvsimState **out);

/**
 * Creates a single-mode coherent state with mean quadratures (`x`, `p`).
 *
 * # Safety
 * `out` must be a valid writable pointer.
 */
CvsimStatus cvsim_state_coherent(double x, double p, CvsimState **out);

/**
 * Creates a single-mode squeezed vacuum with variance `v_sq` along the axis
 * rotated by `angle` and `v_anti` along the orthogonal axis.
 *
 * # Safety
 * `out` must be a valid writable pointer.
 */
CvsimStatus cvsim_state_squeezed(double v_sq, double v_anti, double angle, CvsimState **out);

/**
 * Tensor product of two states, `a` first.
 *
 * # Safety
 * `a` and `b` must be valid state handles and `out` a writable pointer.
 */
CvsimStatus cvsim_state_tensor(const CvsimState *a, const CvsimState *b, CvsimState **out);

/**
 * Releases a state handle. Null is ignored.
 *
 * # Safety
 * `state` must be null or a handle returned by this library that has not
 * been freed before.
 */
void cvsim_state_free(CvsimState *state);

/**
 * Number of modes of a state; 0 if the handle is null.
 *
 * # Safety
 * `state` must be null or a valid handle.
 */
uintptr_t cvsim_state_n_modes(const CvsimState *state);

/**
 * Copies the mean quadrature vector (length `2 * n_modes`) into `buf`.
 *
 * # Safety
 * `state` must be a valid handle and `buf` writable for `len` doubles.
 */
CvsimStatus cvsim_state_mean(const CvsimState *state, double *buf, uintptr_t len);

/**
 * Copies the covariance matrix row-major (length `(2 n)^2`) into `buf`.
 *
 * # Safety
 * `state` must be a valid handle and `buf` writable for `len` doubles.
 */
CvsimStatus cvsim_state_cov(const CvsimState *state, double *buf, uintptr_t len);

/**
 * Uhlmann fidelity between two single-mode states, written to `out`.
 *
 * # Safety
 * `a` and `b` must be valid handles and `out` a writable pointer.
 */
CvsimStatus cvsim_fidelity(const CvsimState *a, const CvsimState *b, double *out);

/**
 * Teleports a single-mode state through a symmetric two-mode squeezed
 * resource of squeezed variance `epr_v_sq`, with equal feedforward gain
 * `gain` on both quadratures (1.0 is unity gain).
 *
 * # Safety
 * `input` must be a valid handle and `out` a writable pointer.
 */
CvsimStatus cvsim_teleport(const CvsimState *input, double epr_v_sq, double gain, CvsimState **out);

/**
 * Applies the off-line two-mode quadrature-coupling gate with beam-splitter
 * reflectance `reflectance` to a two-mode input, using two pure ancillas of
 * squeezed variance `ancilla_v_sq` (x-squeezed and p-squeezed).
 *
 * # Safety
 * `input` must be a valid handle and `out` a writable pointer.
 */
CvsimStatus cvsim_qnd_offline(const CvsimState *input,
                              double reflectance,
                              double ancilla_v_sq,
                              CvsimState **out);

/**
 * Builds a four-mode cluster state of the given shape from four pure
 * p-squeezed inputs with squeezed variances `v_sq[0..4]`.
 *
 * # Safety
 * `v_sq` must point to four doubles and `out` must be writable.
 */
CvsimStatus cvsim_cluster4(CvsimClusterShape shape, const double *v_sq, CvsimState **out);

/**
 * Parses and compiles circuit source text (the `.cvc` language) and returns
 * the ensemble-average output state. On parse or compile failure the error
 * list (one `line:col-col: CODE: message` per line) is available through
 * `cvsim_last_error`.
 *
 * # Safety
 * `source` must be a valid NUL-terminated string and `out` writable.
 */
CvsimStatus cvsim_run_source(const char *source, CvsimState **out);

/**
 * Serializes a state as JSON: `{"n_modes": n, "mean": [...], "cov": [[...]]}`.
 * The returned string must be released with `cvsim_string_free`.
 *
 * # Safety
 * `state` must be a valid handle and `out` a writable pointer.
 */
CvsimStatus cvsim_state_to_json(const CvsimState *state, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void cvsim_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CVSIM_H */
