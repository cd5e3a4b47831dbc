#ifndef CCLAB_H
#define CCLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CCLAB_STATUS_OK = 0,
  CCLAB_STATUS_NULL_POINTER = 1,
  CCLAB_STATUS_INVALID_ARGUMENT = 2,
  CCLAB_STATUS_CUT_LOCUS = 3,
  CCLAB_STATUS_SINGULAR = 4,
  CCLAB_STATUS_NO_CONVERGENCE = 5,
  CCLAB_STATUS_PANIC = 6,
} CclabStatus;

/**
 * Opaque cost handle.
 */
typedef struct CclabCost CclabCost;

/**
 * Opaque manifold handle.
 */
typedef struct CclabManifold CclabManifold;

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into the library from the same thread.
 */
const char *cclab_last_error(void);

/**
 * Parses a manifold descriptor such as `"S2"`, `"CP1"` or `"S2xR1"`.
 *
 * # Safety
 * `name` must be a valid C string and `out` a valid pointer.
 */
CclabStatus cclab_manifold_new(const char *name, CclabManifold **out);

/**
 * # Safety
 * `m` must be null or a handle from [`cclab_manifold_new`] not yet freed.
 */
void cclab_manifold_free(CclabManifold *m);

/**
 * Number of ambient coordinates of a point.
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
CclabStatus cclab_manifold_ambient_dim(const CclabManifold *m, size_t *out);

/**
 * Builds a cost on `m`: `"half-square"`, `"log"` or `"radial:<profile>"`.
 *
 * # Safety
 * `m` must be a live handle, `spec` a valid C string and `out` a valid pointer.
 */
CclabStatus cclab_cost_new(const CclabManifold *m, const char *spec, CclabCost **out);

/**
 * # Safety
 * `c` must be null or a handle from [`cclab_cost_new`] not yet freed.
 */
void cclab_cost_free(CclabCost *c);

/**
 * `c(x, xbar)`.
 *
 * # Safety
 * `c` must be a live handle; `x` and `xbar` must point to `len` doubles.
 */
CclabStatus cclab_cost_eval(const CclabCost *c,
                            const double *x,
                            const double *xbar,
                            size_t len,
                            double *out);

/**
 * Cross-curvature of `c` at `(x, xbar)` along `p` (tangent at `x`) and
 * `pbar` (tangent at `xbar`), with the pairing `h` of the two vectors.
 * `h` may be null.
 *
 * # Safety
 * `c` must be a live handle; the four arrays must hold `len` doubles each.
 */
CclabStatus cclab_cross(const CclabCost *c,
                        const double *x,
                        const double *xbar,
                        const double *p,
                        const double *pbar,
                        size_t len,
                        double *cross,
                        double *h);

/**
 * Closed-form `-H''` on the unit sphere for unit `q` and unit in-plane `w1`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
CclabStatus cclab_sphere_neg_h_ddot(double rho,
                                    double theta,
                                    double psi,
                                    double w_perp,
                                    double *out);

/**
 * Runs a verification suite with default sizes (reduced if `quick` is
 * nonzero). `*pass` receives 1 if every claim passed, else 0. If `json` is
 * not null it receives the reports as a JSON array, to be released with
 * [`cclab_string_free`].
 *
 * # Safety
 * `name` must be a valid C string and `pass` a valid pointer.
 */
CclabStatus cclab_run_suite(const char *name, uint64_t seed, int quick, int *pass, char **json);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void cclab_string_free(char *s);

#endif  /* CCLAB_H */
