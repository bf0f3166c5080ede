//! C ABI over the `frontfix` library.
//!
//! Every fallible call returns an [`FfStatus`]; on failure a message is kept per
//! thread and can be read with [`ff_last_error_message`]. Handles are opaque and
//! must be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use frontfix::cli::RunConfig;
use frontfix::solver::{self, Forcing, RunResult, RunStatus};
use frontfix::verify::{compatibility_check, equilibrium_front};
use frontfix::{Error, Expr, FrontRow, Parameters};

/// Bumped whenever a signature or enum in this header changes.
pub const FF_ABI_VERSION: u32 = 1;

/// Number of columns in one front row: t, s, s_prime, s_dprime_rhs,
/// identity_residual, v0, vxi0, v1.
pub const FF_FRONT_COLUMNS: usize = 8;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Syntax = 4,
    UnknownIdentifier = 5,
    Domain = 6,
    ZeroPivot = 7,
    NeumannViolation = 8,
    NoEquilibrium = 9,
    FrontCollapse = 10,
    Diverged = 11,
    Config = 12,
    Io = 13,
    OutOfRange = 14,
    Panic = 15,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfRunStatus {
    Completed = 0,
    FrontCollapse = 1,
    Diverged = 2,
}

/// Parsed expression.
pub struct FfExpr {
    inner: Expr,
}

/// Completed (or terminated) solver run with its logged front history.
pub struct FfRun {
    inner: RunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|b| *b != 0);
        CString::new(bytes).unwrap_or_default()
    });
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> FfStatus {
    match err {
        Error::InvalidInput(_) => FfStatus::InvalidInput,
        Error::Syntax { .. } => FfStatus::Syntax,
        Error::UnknownIdentifier { .. } => FfStatus::UnknownIdentifier,
        Error::Domain(_) => FfStatus::Domain,
        Error::ZeroPivot { .. } => FfStatus::ZeroPivot,
        Error::NeumannViolation { .. } => FfStatus::NeumannViolation,
        Error::NoEquilibrium { .. } => FfStatus::NoEquilibrium,
        Error::FrontCollapse { .. } => FfStatus::FrontCollapse,
        Error::Diverged { .. } => FfStatus::Diverged,
        Error::Config(_) => FfStatus::Config,
        Error::Io(_) => FfStatus::Io,
    }
}

fn fail(status: FfStatus, msg: impl Into<String>) -> FfStatus {
    set_error(msg.into());
    status
}

/// Runs `body`, translating library errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), FfStatus>) -> FfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            FfStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(FfStatus::Panic, "internal panic"),
    }
}

fn lib(err: Error) -> FfStatus {
    fail(status_of(&err), err.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, FfStatus> {
    if p.is_null() {
        return Err(fail(FfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(FfStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), FfStatus> {
    if p.is_null() {
        Err(fail(FfStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

#[no_mangle]
pub extern "C" fn ff_abi_version() -> u32 {
    FF_ABI_VERSION
}

/// Message describing the last failure on this thread, or NULL after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ff_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Parses `text` over the `n_vars` variable names in `vars`.
///
/// # Safety
/// `text` and each of `vars[0..n_vars]` must be NUL-terminated strings; `out` must
/// be writable. On success `*out` owns a handle to release with [`ff_expr_free`].
#[no_mangle]
pub unsafe extern "C" fn ff_expr_parse(
    text: *const c_char,
    vars: *const *const c_char,
    n_vars: usize,
    out: *mut *mut FfExpr,
) -> FfStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = str_arg(text, "text")?;
        if n_vars > 0 {
            non_null(vars, "vars")?;
        }
        let names = (0..n_vars)
            .map(|i| str_arg(*vars.add(i), "variable name"))
            .collect::<Result<Vec<_>, _>>()?;
        let expr = Expr::parse(text, &names).map_err(lib)?;
        *out = Box::into_raw(Box::new(FfExpr { inner: expr }));
        Ok(())
    })
}

/// Evaluates at `args[0..n_args]`, which must match the parsed variable count.
///
/// # Safety
/// `expr` must come from [`ff_expr_parse`]; `args` must point to `n_args` doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_expr_eval(expr: *const FfExpr, args: *const f64, n_args: usize, out: *mut f64) -> FfStatus {
    guard(|| {
        non_null(expr, "expr")?;
        non_null(out, "out")?;
        let args: &[f64] = if n_args == 0 {
            &[]
        } else {
            non_null(args, "args")?;
            std::slice::from_raw_parts(args, n_args)
        };
        *out = (*expr).inner.eval(args).map_err(lib)?;
        Ok(())
    })
}

/// Releases an expression handle; NULL is ignored.
///
/// # Safety
/// `expr` must come from [`ff_expr_parse`] and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn ff_expr_free(expr: *mut FfExpr) {
    if !expr.is_null() {
        drop(Box::from_raw(expr));
    }
}

/// Steady front `s*` for the constant boundary value `c`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_equilibrium_front(c: f64, lambda: f64, sigma: f64, out: *mut f64) -> FfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = equilibrium_front(c, lambda, sigma).map_err(lib)?;
        Ok(())
    })
}

/// Checks the three corner compatibility conditions. `f` is an expression in one
/// variable (time) and `phi` in one variable (space). `*passed` receives 1 when all
/// hold, 0 otherwise; a bitmask of failing conditions (1 = corner, 2 = flux,
/// 4 = Neumann) goes to `*failed_mask` when it is not NULL.
///
/// # Safety
/// Handles must come from [`ff_expr_parse`]; `passed` must be writable and
/// `failed_mask` writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn ff_compat_check(
    lambda: f64,
    sigma: f64,
    b: f64,
    f: *const FfExpr,
    phi: *const FfExpr,
    tol: f64,
    passed: *mut i32,
    failed_mask: *mut u32,
) -> FfStatus {
    guard(|| {
        non_null(f, "f")?;
        non_null(phi, "phi")?;
        non_null(passed, "passed")?;
        let params = Parameters::new(lambda, sigma, b, 0.0).map_err(lib)?;
        let report = compatibility_check(&params, &(*f).inner, &(*phi).inner, tol).map_err(lib)?;
        *passed = i32::from(report.overall);
        if !failed_mask.is_null() {
            *failed_mask = report
                .checks
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.pass)
                .fold(0, |m, (i, _)| m | (1 << i));
        }
        Ok(())
    })
}

/// Runs the solver described by configuration text (the same `key = value` format
/// as the command-line tool). Nothing is written to disk and the compatibility
/// conditions are not enforced. A run that ends in collapse or divergence still
/// succeeds; query it with [`ff_run_status`].
///
/// # Safety
/// `config_text` must be a NUL-terminated string and `out` writable. On success
/// `*out` owns a handle to release with [`ff_run_free`].
#[no_mangle]
pub unsafe extern "C" fn ff_solve(config_text: *const c_char, out: *mut *mut FfRun) -> FfStatus {
    guard(|| {
        non_null(out, "out")?;
        let cfg = RunConfig::from_toml(str_arg(config_text, "config_text")?).map_err(lib)?;
        let params = cfg.params().map_err(lib)?;
        let grid = cfg.grid().map_err(lib)?;
        let f = cfg.f().map_err(lib)?;
        let phi = cfg.phi().map_err(lib)?;
        let run = solver::run(&params, &grid, &f, &phi, &Forcing::none(), &[]).map_err(lib)?;
        *out = Box::into_raw(Box::new(FfRun { inner: run }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from [`ff_solve`].
#[no_mangle]
pub unsafe extern "C" fn ff_run_status(run: *const FfRun) -> FfRunStatus {
    match run.as_ref().map(|r| &r.inner.status) {
        Some(RunStatus::FrontCollapse { .. }) => FfRunStatus::FrontCollapse,
        Some(RunStatus::Diverged { .. }) => FfRunStatus::Diverged,
        _ => FfRunStatus::Completed,
    }
}

/// Number of logged rows (0 for NULL).
///
/// # Safety
/// `run` must come from [`ff_solve`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ff_run_rows(run: *const FfRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.series.len())
}

/// Copies row `index` into `out[0..FF_FRONT_COLUMNS]`.
///
/// # Safety
/// `run` must come from [`ff_solve`]; `out` must have room for
/// [`FF_FRONT_COLUMNS`] doubles.
#[no_mangle]
pub unsafe extern "C" fn ff_run_row(run: *const FfRun, index: usize, out: *mut f64) -> FfStatus {
    guard(|| {
        non_null(run, "run")?;
        non_null(out, "out")?;
        let rows = (*run).inner.series.rows();
        let row: &FrontRow = rows
            .get(index)
            .ok_or_else(|| fail(FfStatus::OutOfRange, format!("row {index} of {}", rows.len())))?;
        std::ptr::copy_nonoverlapping(row.values().as_ptr(), out, FF_FRONT_COLUMNS);
        Ok(())
    })
}

/// Releases a run handle; NULL is ignored.
///
/// # Safety
/// `run` must come from [`ff_solve`] and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn ff_run_free(run: *mut FfRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
