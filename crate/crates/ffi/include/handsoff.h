#ifndef HANDSOFF_H
#define HANDSOFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HoMethod {
  HO_METHOD_HANDSOFF = 0,
  HO_METHOD_L1 = 1,
  HO_METHOD_REWEIGHTED = 2,
} HoMethod;

typedef enum HoStatus {
  HO_STATUS_OK = 0,
  HO_STATUS_INVALID_ARGUMENT = 1,
  HO_STATUS_NOT_REACHABLE = 2,
  HO_STATUS_NULL_POINTER = 3,
  HO_STATUS_BUFFER_TOO_SMALL = 4,
  HO_STATUS_NUMERICAL = 5,
  HO_STATUS_PANIC = 6,
} HoStatus;

/*
 Opaque solve result handle.
 */
typedef struct HoSolution HoSolution;

/*
 Opaque linear system handle.
 */
typedef struct HoSystem HoSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *ho_last_error(void);

/*
 Library version as a NUL-terminated static string.
 */
const char *ho_version(void);

/*
 Build a system `x' = A x + b u` from row-major `a` (n×n) and `b` (n).

 # Safety
 `a` must point to `n*n` doubles, `b` to `n` doubles, `out` to writable storage.
 */
enum HoStatus ho_system_new(uintptr_t n, const double *a, const double *b, struct HoSystem **out);

/*
 The double integrator `x1' = x2, x2' = u`.
 */
struct HoSystem *ho_system_double_integrator(void);

/*
 # Safety
 `sys` must be null or a handle from this library that was not freed yet.
 */
void ho_system_free(struct HoSystem *sys);

/*
 State dimension, or 0 for a null handle.

 # Safety
 `sys` must be null or a live handle.
 */
uintptr_t ho_system_dim(const struct HoSystem *sys);

/*
 Solve for a sparse control on a grid of `grid` intervals over `[0, horizon]`.
 `method` is an `HoMethod` value; `p` is only used by `HO_METHOD_REWEIGHTED`.

 # Safety
 `sys` must be a live handle, `xi` must point to `xi_len` doubles and `out`
 to writable storage.
 */
enum HoStatus ho_solve(const struct HoSystem *sys,
                       const double *xi,
                       uintptr_t xi_len,
                       double horizon,
                       uintptr_t grid,
                       int32_t method,
                       double p,
                       struct HoSolution **out);

/*
 # Safety
 `sol` must be null or a live handle.
 */
void ho_solution_free(struct HoSolution *sol);

/*
 Number of control samples, or 0 for a null handle.

 # Safety
 `sol` must be null or a live handle.
 */
uintptr_t ho_solution_len(const struct HoSolution *sol);

/*
 Copy the control samples into `buf`, which must hold `ho_solution_len` doubles.

 # Safety
 `sol` must be a live handle and `buf` must point to `buf_len` writable doubles.
 */
enum HoStatus ho_solution_values(const struct HoSolution *sol, double *buf, uintptr_t buf_len);

/*
 Support measure of the control; NaN for a null handle.

 # Safety
 `sol` must be null or a live handle.
 */
double ho_solution_l0(const struct HoSolution *sol);

/*
 L1 norm of the control; NaN for a null handle.

 # Safety
 `sol` must be null or a live handle.
 */
double ho_solution_l1(const struct HoSolution *sol);

/*
 Samples strictly between the levels -1, 0, 1.

 # Safety
 `sol` must be null or a live handle.
 */
uintptr_t ho_solution_fractional_count(const struct HoSolution *sol);

/*
 1 when a costate certificate was found for the control, 0 otherwise.
 `max_violation` (optional) receives the certificate's worst violation.

 # Safety
 `sol` must be null or a live handle; `max_violation` null or writable.
 */
int32_t ho_solution_certified(const struct HoSolution *sol, double *max_violation);

/*
 Minimum support `V(ξ)`; `HO_STATUS_NOT_REACHABLE` when `ξ` cannot be steered to 0.

 # Safety
 `sys` must be a live handle, `xi` must point to `xi_len` doubles and `out` be writable.
 */
enum HoStatus ho_value(const struct HoSystem *sys,
                       const double *xi,
                       uintptr_t xi_len,
                       double horizon,
                       uintptr_t grid,
                       double *out);

/*
 Writes 1 to `out` if `ξ` is reachable on the grid, 0 otherwise.

 # Safety
 `sys` must be a live handle, `xi` must point to `xi_len` doubles and `out` be writable.
 */
enum HoStatus ho_is_reachable(const struct HoSystem *sys,
                              const double *xi,
                              uintptr_t xi_len,
                              double horizon,
                              uintptr_t grid,
                              int32_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HANDSOFF_H */
