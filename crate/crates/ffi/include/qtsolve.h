#ifndef QTSOLVE_H
#define QTSOLVE_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QtStatus {
  QT_STATUS_OK = 0,
  QT_STATUS_NULL_POINTER = 1,
  QT_STATUS_INVALID_ARGUMENT = 2,
  QT_STATUS_INVALID_MODEL = 3,
  // The circulant preconditioner has a singular eigen-block.
  QT_STATUS_SINGULAR = 4,
  // The iteration cap was hit; outputs hold the last iterate.
  QT_STATUS_NOT_CONVERGED = 5,
  QT_STATUS_BREAKDOWN = 6,
  QT_STATUS_NUMERICAL = 7,
  QT_STATUS_PANIC = 8,
} QtStatus;

// Values accepted by the `model` argument of [`qt_toeplitz_from_model`].
typedef enum QtModel {
  QT_MODEL_AR1 = 0,
  QT_MODEL_MA1 = 1,
} QtModel;

// Values accepted by [`QtSolveOptions::stop`].
typedef enum QtStop {
  // `|r_k| <= tol |r_0|`
  QT_STOP_RELATIVE = 0,
  // `|r_k| <= tol`
  QT_STOP_ABSOLUTE = 1,
} QtStop;

// Factored circulant preconditioner, ready for repeated inverse applications.
typedef struct QtStrang QtStrang;

// Hermitian quaternion Toeplitz matrix.
typedef struct QtToeplitz QtToeplitz;

typedef struct QtSolveOptions {
  double tol;
  // A [`QtStop`] value.
  int32_t stop;
  // 0 means `10 n`.
  size_t max_iter;
} QtSolveOptions;

typedef struct QtSolveResult {
  size_t iterations;
  // `|b - T x|` for the returned `x`.
  double final_error;
  bool converged;
  double time_ms;
} QtSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *qt_version(void);

// Copies the calling thread's last error message into `buf` (truncated and
// NUL-terminated when `len > 0`) and returns its full length in bytes, not
// counting the terminator. Empty after a successful call.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t qt_last_error(char *buf, size_t len);

struct QtSolveOptions qt_solve_options_default(void);

// Builds `T` from its first column `col` (`n` quaternions, `col[0]` real).
//
// # Safety
// `col` must hold `4 n` doubles and `out` must be writable.
enum QtStatus qt_toeplitz_from_column(const double *col, size_t n, struct QtToeplitz **out);

// Builds the `n x n` Toeplitz matrix generated by the symbol of a first-order
// autoregressive (`QtModel::Ar1`) or moving-average (`QtModel::Ma1`)
// quaternion process with coefficient `beta` (4 doubles) and noise scale
// `delta`.
//
// # Safety
// `beta` must hold 4 doubles and `out` must be writable.
enum QtStatus qt_toeplitz_from_model(int32_t model,
                                     const double *beta,
                                     double delta,
                                     size_t n,
                                     struct QtToeplitz **out);

// # Safety
// `t` must be null or a handle from this library, not yet freed.
void qt_toeplitz_free(struct QtToeplitz *t);

// Order of `t`, or 0 for a null handle.
//
// # Safety
// `t` must be null or a live handle.
size_t qt_toeplitz_size(const struct QtToeplitz *t);

// `y = T x` via FFTs. `x` and `y` hold `4 n` doubles each.
//
// # Safety
// `t` must be a live handle; `x` and `y` must be valid for `4 n` doubles.
enum QtStatus qt_toeplitz_matvec(const struct QtToeplitz *t, const double *x, double *y);

// Ascending eigenvalues of `T` (`n` doubles, one per conjugate pair) from a
// dense eigensolve. Fails with `InvalidArgument` above the dense size cap.
//
// # Safety
// `t` must be a live handle; `out` must be valid for `n` doubles.
enum QtStatus qt_toeplitz_spectrum(const struct QtToeplitz *t, double *out);

// Factors the Strang circulant preconditioner of `t`. Fails with
// `Singular` when an eigen-block is singular.
//
// # Safety
// `t` must be a live handle and `out` writable.
enum QtStatus qt_strang_new(const struct QtToeplitz *t, struct QtStrang **out);

// # Safety
// `p` must be null or a handle from this library, not yet freed.
void qt_strang_free(struct QtStrang *p);

// `z = C^{-1} r`.
//
// # Safety
// `p` must be a live handle; `r` and `z` must be valid for `4 n` doubles.
enum QtStatus qt_strang_apply_inverse(const struct QtStrang *p, const double *r, double *z);

// Ascending eigenvalues of the circulant (`n` doubles) from its 2x2 blocks.
//
// # Safety
// `p` must be a live handle; `out` must be valid for `n` doubles.
enum QtStatus qt_strang_spectrum(const struct QtStrang *p, double *out);

// Solves `T x = b` by conjugate gradients from a zero start, preconditioned by
// `precond` when it is non-null. `opts` and `result` may be null. On
// `NotConverged`, `x` and `result` describe the last iterate.
//
// # Safety
// Handles must be live and of matching order; `b` and `x` must be valid for
// `4 n` doubles.
enum QtStatus qt_solve(const struct QtToeplitz *t,
                       const struct QtStrang *precond,
                       const double *b,
                       const struct QtSolveOptions *opts,
                       double *x,
                       struct QtSolveResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QTSOLVE_H */
