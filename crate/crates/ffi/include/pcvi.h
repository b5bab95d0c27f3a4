#ifndef PCVI_H
#define PCVI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of an API call.
 */
typedef enum PcviStatus {
  PCVI_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PCVI_STATUS_NULL_POINTER = 1,
  /**
   * Invalid argument: unknown name, bad order, dimension mismatch.
   */
  PCVI_STATUS_USAGE = 2,
  /**
   * A Newton iteration failed to converge.
   */
  PCVI_STATUS_SOLVER = 3,
  /**
   * The system cannot supply the derivatives the method needs.
   */
  PCVI_STATUS_CAPABILITY = 4,
  PCVI_STATUS_ORACLE = 5,
  PCVI_STATUS_IO = 6,
  /**
   * Internal panic; the library state is unaffected.
   */
  PCVI_STATUS_PANIC = 7,
} PcviStatus;

/**
 * A configured one-step method with a fixed step size.
 */
typedef struct PcviIntegrator PcviIntegrator;

/**
 * A mechanical system.
 */
typedef struct PcviSystem PcviSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *pcvi_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pcvi_version(void);

/**
 * Create a builtin system: `"sho"`, `"pendulum"` or `"duffing"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PcviStatus pcvi_system_builtin(const char *name, struct PcviSystem **out);

/**
 * Release a system. Null is ignored.
 *
 * # Safety
 * `system` must come from [`pcvi_system_builtin`] and not be used again.
 */
void pcvi_system_free(struct PcviSystem *system);

/**
 * Configuration dimension, or 0 for a null handle.
 *
 * # Safety
 * `system` must be null or a live handle.
 */
size_t pcvi_system_dim(const struct PcviSystem *system);

/**
 * Total energy `H(q, p)`.
 *
 * # Safety
 * `q` and `p` must point to `dim` doubles; `out` must be valid.
 */
enum PcviStatus pcvi_system_energy(const struct PcviSystem *system,
                                   const double *q,
                                   const double *p,
                                   size_t dim,
                                   double *out);

/**
 * Create an integrator for `method` (`"hem(n,m)"`, `"gauss2"` or
 * `"midpoint"`) with step `h`. The system is copied.
 *
 * # Safety
 * `system` must be live, `method` NUL-terminated and `out` valid.
 */
enum PcviStatus pcvi_integrator_new(const struct PcviSystem *system,
                                    const char *method,
                                    double h,
                                    struct PcviIntegrator **out);

/**
 * Release an integrator. Null is ignored.
 *
 * # Safety
 * `integrator` must come from [`pcvi_integrator_new`] and not be used again.
 */
void pcvi_integrator_free(struct PcviIntegrator *integrator);

/**
 * Set the Newton tolerance and iteration cap (defaults 1e-12 and 50).
 *
 * # Safety
 * `integrator` must be a live handle.
 */
enum PcviStatus pcvi_integrator_set_tolerance(struct PcviIntegrator *integrator,
                                              double tol,
                                              size_t max_iter);

/**
 * Advance `(q, p)` by one step in place. On failure the state is unchanged.
 *
 * # Safety
 * `q` and `p` must point to `dim` writable doubles.
 */
enum PcviStatus pcvi_integrator_step(const struct PcviIntegrator *integrator,
                                     double *q,
                                     double *p,
                                     size_t dim);

/**
 * Integrate `steps` steps from `(q0, p0)`. Points are written row by row
 * to `out_q` and `out_p`, each of capacity `(steps + 1) * dim`, starting
 * with the initial state; `out_len` receives the number of points. A
 * failure after the first step keeps the computed prefix and returns the
 * failure status.
 *
 * # Safety
 * All pointers must be valid for the stated sizes.
 */
enum PcviStatus pcvi_integrator_run(const struct PcviIntegrator *integrator,
                                    const double *q0,
                                    const double *p0,
                                    size_t dim,
                                    size_t steps,
                                    double *out_q,
                                    double *out_p,
                                    size_t *out_len);

/**
 * Discrete Lagrangian `L_d(q0, q1, h)` of orders `(n, m)`, and optionally
 * its partial derivatives. `d1` and `d2` may be null; otherwise they
 * receive `dim` doubles each.
 *
 * # Safety
 * Non-null pointers must be valid for `dim` doubles; `value` must be valid.
 */
enum PcviStatus pcvi_discrete_lagrangian(const struct PcviSystem *system,
                                         size_t n,
                                         size_t m,
                                         double h,
                                         const double *q0,
                                         const double *q1,
                                         size_t dim,
                                         double *value,
                                         double *d1,
                                         double *d2);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PCVI_H */
