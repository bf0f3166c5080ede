#ifndef FRONTFIX_H
#define FRONTFIX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Bumped whenever a signature or enum in this header changes.
#define FF_ABI_VERSION 1

// Number of columns in one front row: t, s, s_prime, s_dprime_rhs,
// identity_residual, v0, vxi0, v1.
#define FF_FRONT_COLUMNS 8

typedef enum FfRunStatus {
  FF_RUN_STATUS_COMPLETED = 0,
  FF_RUN_STATUS_FRONT_COLLAPSE = 1,
  FF_RUN_STATUS_DIVERGED = 2,
} FfRunStatus;

typedef enum FfStatus {
  FF_STATUS_OK = 0,
  FF_STATUS_NULL_POINTER = 1,
  FF_STATUS_INVALID_UTF8 = 2,
  FF_STATUS_INVALID_INPUT = 3,
  FF_STATUS_SYNTAX = 4,
  FF_STATUS_UNKNOWN_IDENTIFIER = 5,
  FF_STATUS_DOMAIN = 6,
  FF_STATUS_ZERO_PIVOT = 7,
  FF_STATUS_NEUMANN_VIOLATION = 8,
  FF_STATUS_NO_EQUILIBRIUM = 9,
  FF_STATUS_FRONT_COLLAPSE = 10,
  FF_STATUS_DIVERGED = 11,
  FF_STATUS_CONFIG = 12,
  FF_STATUS_IO = 13,
  FF_STATUS_OUT_OF_RANGE = 14,
  FF_STATUS_PANIC = 15,
} FfStatus;

// Parsed expression.
typedef struct FfExpr FfExpr;

// Completed (or terminated) solver run with its logged front history.
typedef struct FfRun FfRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

uint32_t ff_abi_version(void);

// Message describing the last failure on this thread, or NULL after a success.
// The pointer stays valid until the next call into this library on the same thread.
const char *ff_last_error_message(void);

// Parses `text` over the `n_vars` variable names in `vars`.
//
// # Safety
// `text` and each of `vars[0..n_vars]` must be NUL-terminated strings; `out` must
// be writable. On success `*out` owns a handle to release with [`ff_expr_free`].
enum FfStatus ff_expr_parse(const char *text,
                            const char *const *vars,
                            size_t n_vars,
                            struct FfExpr **out);

// Evaluates at `args[0..n_args]`, which must match the parsed variable count.
//
// # Safety
// `expr` must come from [`ff_expr_parse`]; `args` must point to `n_args` doubles;
// `out` must be writable.
enum FfStatus ff_expr_eval(const struct FfExpr *expr,
                           const double *args,
                           size_t n_args,
                           double *out);

// Releases an expression handle; NULL is ignored.
//
// # Safety
// `expr` must come from [`ff_expr_parse`] and not have been freed already.
void ff_expr_free(struct FfExpr *expr);

// Steady front `s*` for the constant boundary value `c`.
//
// # Safety
// `out` must be writable.
enum FfStatus ff_equilibrium_front(double c, double lambda, double sigma, double *out);

// Checks the three corner compatibility conditions. `f` is an expression in one
// variable (time) and `phi` in one variable (space). `*passed` receives 1 when all
// hold, 0 otherwise; a bitmask of failing conditions (1 = corner, 2 = flux,
// 4 = Neumann) goes to `*failed_mask` when it is not NULL.
//
// # Safety
// Handles must come from [`ff_expr_parse`]; `passed` must be writable and
// `failed_mask` writable or NULL.
enum FfStatus ff_compat_check(double lambda,
                              double sigma,
                              double b,
                              const struct FfExpr *f,
                              const struct FfExpr *phi,
                              double tol,
                              int32_t *passed,
                              uint32_t *failed_mask);

// Runs the solver described by configuration text (the same `key = value` format
// as the command-line tool). Nothing is written to disk and the compatibility
// conditions are not enforced. A run that ends in collapse or divergence still
// succeeds; query it with [`ff_run_status`].
//
// # Safety
// `config_text` must be a NUL-terminated string and `out` writable. On success
// `*out` owns a handle to release with [`ff_run_free`].
enum FfStatus ff_solve(const char *config_text, struct FfRun **out);

// # Safety
// `run` must come from [`ff_solve`].
enum FfRunStatus ff_run_status(const struct FfRun *run);

// Number of logged rows (0 for NULL).
//
// # Safety
// `run` must come from [`ff_solve`] or be NULL.
size_t ff_run_rows(const struct FfRun *run);

// Copies row `index` into `out[0..FF_FRONT_COLUMNS]`.
//
// # Safety
// `run` must come from [`ff_solve`]; `out` must have room for
// [`FF_FRONT_COLUMNS`] doubles.
enum FfStatus ff_run_row(const struct FfRun *run, size_t index, double *out);

// Releases a run handle; NULL is ignored.
//
// # Safety
// `run` must come from [`ff_solve`] and not have been freed already.
void ff_run_free(struct FfRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRONTFIX_H */
