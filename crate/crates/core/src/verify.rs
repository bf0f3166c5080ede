//! Compatibility checks, the steady-state oracle, manufactured solutions and
//! convergence studies.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{DiffScheme, Expr};
use crate::fit::log_log;
use crate::solver::{self, second_difference, Forcing, RunStatus};
use crate::stencil::trapezoid;
use crate::types::{FrontSeries, Grid, Parameters};

/// Step for first derivatives in the compatibility check.
pub const COMPAT_H1: f64 = 1e-5;
/// Step for the second derivative of `phi`; `1e-5` would leave ~1e-6 of roundoff.
pub const COMPAT_H2: f64 = 1e-4;
pub const DEFAULT_COMPAT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatReport {
    pub checks: Vec<CompatCheck>,
    pub overall: bool,
}

impl CompatReport {
    pub fn failures(&self) -> impl Iterator<Item = &CompatCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

pub const CHECK_CORNER: &str = "f(0) = phi(0)";
pub const CHECK_FLUX: &str = "f'(0) = phi''(0) - lambda*phi(0)";
pub const CHECK_NEUMANN: &str = "phi'(b) = 0";

/// Evaluates the three corner compatibility conditions between `f`, `phi` and `lambda`.
pub fn compatibility_check(params: &Parameters, f: &Expr, phi: &Expr, tol: f64) -> Result<CompatReport> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be >= 0, got {tol}")));
    }
    let f0 = f.eval1(0.0)?;
    let phi0 = phi.eval1(0.0)?;
    let df0 = f.numeric_derivative(0.0, 1, COMPAT_H1, DiffScheme::Forward)?;
    let d2phi0 = match phi.numeric_derivative(0.0, 2, COMPAT_H2, DiffScheme::Central) {
        Err(Error::Domain(_)) => phi.numeric_derivative(0.0, 2, 1e-3, DiffScheme::Forward)?,
        other => other?,
    };
    let dphib = phi.numeric_derivative(params.b, 1, COMPAT_H1, DiffScheme::Backward)?;

    let make = |name, lhs: f64, rhs: f64| {
        let gap = (lhs - rhs).abs();
        CompatCheck {
            name,
            lhs,
            rhs,
            gap,
            pass: gap <= tol * (1.0 + lhs.abs().max(rhs.abs())),
        }
    };
    let checks = vec![
        make(CHECK_CORNER, f0, phi0),
        make(CHECK_FLUX, df0, d2phi0 - params.lambda * phi0),
        make(CHECK_NEUMANN, dphib, 0.0),
    ];
    let overall = checks.iter().all(|c| c.pass);
    Ok(CompatReport { checks, overall })
}

/// `(c / sqrt(lambda)) tanh(sqrt(lambda) s) - sigma s`; its positive root is the
/// steady front for constant boundary data `c`.
pub fn equilibrium_residual(c: f64, lambda: f64, sigma: f64, s: f64) -> f64 {
    let k = lambda.sqrt();
    c / k * (k * s).tanh() - sigma * s
}

/// Steady front position for constant boundary data `c` by certified bisection.
pub fn equilibrium_front(c: f64, lambda: f64, sigma: f64) -> Result<f64> {
    if !(c > 0.0 && lambda > 0.0 && sigma > 0.0) || ![c, lambda, sigma].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "equilibrium needs c, lambda, sigma > 0 (got {c}, {lambda}, {sigma})"
        )));
    }
    if c <= sigma {
        return Err(Error::NoEquilibrium { c, sigma });
    }
    let phi = |s: f64| equilibrium_residual(c, lambda, sigma, s);
    // small-s expansion: (c - sigma) s - c lambda s^3 / 3
    let mut lo = 0.5 * (3.0 * (c - sigma) / (c * lambda)).sqrt();
    let mut tries = 0;
    while phi(lo) <= 0.0 {
        lo *= 0.5;
        tries += 1;
        if tries > 1000 || lo == 0.0 {
            return Err(Error::NoEquilibrium { c, sigma });
        }
    }
    let mut hi = c / (sigma * lambda.sqrt()) + 1.0;
    if phi(hi) >= 0.0 {
        return Err(Error::InvalidInput("equilibrium bracket not certified".into()));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if phi(lo).abs() <= phi(hi).abs() { lo } else { hi })
}

/// `c cosh(sqrt(lambda) (s - x)) / cosh(sqrt(lambda) s)` as an expression in `x`.
pub fn equilibrium_profile(c: f64, lambda: f64, s: f64) -> Expr {
    let text = format!("{c:?}*cosh(sqrt({lambda:?})*({s:?} - x))/cosh(sqrt({lambda:?})*{s:?})");
    Expr::parse(&text, &["x"]).expect("generated profile parses")
}

/// Times and values of a scalar quantity sampled along a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    /// Largest value with `t` in `[from, to]`.
    pub fn max_in(&self, from: f64, to: f64) -> Option<f64> {
        self.t
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= from && **t <= to)
            .map(|(_, v)| *v)
            .reduce(f64::max)
    }
}

/// `|s''_fd - s_dprime_rhs|` at every interior row, with `s''_fd` the three-point
/// second difference of the logged front.
pub fn identity_residual_series(series: &FrontSeries) -> Result<TimeSeries> {
    let rows = series.rows();
    if rows.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "identity residual needs at least 5 rows, got {}",
            rows.len()
        )));
    }
    let mut t = Vec::with_capacity(rows.len() - 2);
    let mut values = Vec::with_capacity(rows.len() - 2);
    for w in rows.windows(3) {
        let fd = second_difference([w[0].t, w[1].t, w[2].t], [w[0].s, w[1].s, w[2].s]);
        t.push(w[1].t);
        values.push((fd - w[1].s_dprime_rhs).abs());
    }
    Ok(TimeSeries { t, values })
}

/// Step used for derivatives of manufactured fields (fourth-order stencils).
pub const MMS_H: f64 = 1e-3;
pub const MMS_NEUMANN_TOL: f64 = 1e-8;

/// A manufactured pair `(s_bar(t), v_bar(xi, t))` together with the forcing that makes
/// it an exact solution of the forced fixed-domain system.
#[derive(Debug, Clone)]
pub struct MmsCase {
    pub s_bar: Expr,
    pub v_bar: Expr,
    pub params: Parameters,
    /// `v_bar(0, t)`.
    pub f_derived: Expr,
    /// `v_bar(x / b, 0)` with `b = s_bar(0)`.
    pub phi_derived: Expr,
}

/// Builds the manufactured case. `s_bar` is an expression in `t`, `v_bar` one in
/// `(xi, t)`; `lambda`, `sigma` and `t_end` are taken from `base`, `b` from `s_bar(0)`.
pub fn make_mms_case(s_bar: &Expr, v_bar: &Expr, base: &Parameters) -> Result<MmsCase> {
    if s_bar.vars().len() != 1 || v_bar.vars().len() != 2 {
        return Err(Error::InvalidInput(
            "manufactured front must be in (t), field in (xi, t)".into(),
        ));
    }
    let t_end = base.t_end;
    for i in 0..=100 {
        let t = t_end * i as f64 / 100.0;
        let s = s_bar.eval1(t)?;
        if !(s > 0.0) {
            return Err(Error::InvalidInput(format!("manufactured front s({t}) = {s} is not positive")));
        }
    }
    for i in 0..10 {
        let t = t_end * i as f64 / 9.0;
        let mut args = [1.0, t];
        let slope = v_bar.partial(&mut args, 0, 1, MMS_H, DiffScheme::Central4)?;
        if slope.abs() > MMS_NEUMANN_TOL {
            return Err(Error::NeumannViolation { t, slope });
        }
    }
    let b = s_bar.eval1(0.0)?;
    let params = Parameters::with_guard(base.lambda, base.sigma, b, t_end, base.s_min.min(0.5 * b))?;
    let f_derived = v_bar.compose(&["t"], &[Expr::constant(0.0, &["t"]), Expr::parse("t", &["t"])?])?;
    let phi_derived = v_bar.compose(&["x"], &[
        Expr::parse(&format!("x/{b:?}"), &["x"])?,
        Expr::constant(0.0, &["x"]),
    ])?;
    Ok(MmsCase {
        s_bar: s_bar.clone(),
        v_bar: v_bar.clone(),
        params,
        f_derived,
        phi_derived,
    })
}

impl MmsCase {
    /// `v_t - v_xixi / s^2 - (xi s' / s) v_xi + lambda v` at the manufactured pair.
    pub fn g(&self, xi: f64, t: f64) -> Result<f64> {
        let s = self.s_bar.eval1(t)?;
        let ds = self.s_bar.numeric_derivative(t, 1, MMS_H, DiffScheme::Central4)?;
        let mut args = [xi, t];
        let v = self.v_bar.eval(&args)?;
        let v_t = self.v_bar.partial(&mut args, 1, 1, MMS_H, DiffScheme::Central4)?;
        let v_xi = self.v_bar.partial(&mut args, 0, 1, MMS_H, DiffScheme::Central4)?;
        let v_xixi = self.v_bar.partial(&mut args, 0, 2, MMS_H, DiffScheme::Central4)?;
        Ok(v_t - v_xixi / (s * s) - xi * ds / s * v_xi + self.params.lambda * v)
    }

    /// Front forcing with the field mean taken by the trapezoid rule on `n_xi` intervals,
    /// so the discrete front law is satisfied exactly by the sampled manufactured field.
    pub fn q(&self, t: f64, n_xi: usize) -> Result<f64> {
        let s = self.s_bar.eval1(t)?;
        let ds = self.s_bar.numeric_derivative(t, 1, MMS_H, DiffScheme::Central4)?;
        let dxi = 1.0 / n_xi as f64;
        let samples = (0..=n_xi)
            .map(|j| self.v_bar.eval(&[j as f64 * dxi, t]))
            .collect::<Result<Vec<_>>>()?;
        Ok(ds - s * (trapezoid(&samples, dxi)? - self.params.sigma))
    }

    pub fn forcing(&self, n_xi: usize) -> Forcing {
        let g_case = self.clone();
        let q_case = self.clone();
        Forcing {
            g: Some(Box::new(move |xi, t| g_case.g(xi, t))),
            q: Some(Box::new(move |t| q_case.q(t, n_xi))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n_xi: usize,
    pub dt: f64,
    pub err_v: f64,
    pub err_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln err_v` against `ln dxi` (levels with varying `n_xi`).
    pub p_space: Option<f64>,
    /// Same slope over the last two levels only.
    pub p_space_last: Option<f64>,
    /// Least-squares slope of `ln err_s` against `ln dt` (levels at fixed `n_xi`).
    pub p_time: Option<f64>,
    pub p_time_last: Option<f64>,
}

/// Errors at or below this level are treated as exact reproduction.
pub const ROUNDOFF_FLOOR: f64 = 1e-9;

impl ConvergenceTable {
    pub fn is_exact(&self) -> bool {
        self.rows.iter().all(|r| r.err_v <= ROUNDOFF_FLOOR && r.err_s <= ROUNDOFF_FLOOR)
    }
}

/// Runs the manufactured case at every level and fits observed orders.
pub fn convergence_study(case: &MmsCase, levels: &[(usize, f64)]) -> Result<ConvergenceTable> {
    if levels.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "convergence study needs at least 3 levels, got {}",
            levels.len()
        )));
    }
    for w in levels.windows(2) {
        let ((n0, dt0), (n1, dt1)) = (w[0], w[1]);
        let refines = n1 >= n0 && dt1 <= dt0 && (n1 > n0 || dt1 < dt0);
        if !refines {
            return Err(Error::InvalidInput(format!(
                "level ({n1}, {dt1}) does not refine ({n0}, {dt0})"
            )));
        }
    }
    let grids = levels
        .iter()
        .map(|&(n, dt)| Grid::new(n, dt))
        .collect::<Result<Vec<_>>>()?;

    let results: Vec<Result<ConvergenceRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = grids
            .iter()
            .map(|grid| scope.spawn(move || run_level(case, grid)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::InvalidInput("level panicked".into()))))
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;

    let space_varies = rows.windows(2).any(|w| w[1].n_xi != w[0].n_xi);
    let time_varies = rows.windows(2).any(|w| w[1].dt != w[0].dt);
    let dxi: Vec<f64> = rows.iter().map(|r| 1.0 / r.n_xi as f64).collect();
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let ev: Vec<f64> = rows.iter().map(|r| r.err_v).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.err_s).collect();
    let n = rows.len();
    let slope = |x: &[f64], y: &[f64]| log_log(x, y).map(|f| f.slope);

    let (p_space, p_space_last) = if space_varies {
        (slope(&dxi, &ev), slope(&dxi[n - 2..], &ev[n - 2..]))
    } else {
        (None, None)
    };
    let (p_time, p_time_last) = if time_varies && !space_varies {
        (slope(&dts, &es), slope(&dts[n - 2..], &es[n - 2..]))
    } else {
        (None, None)
    };
    Ok(ConvergenceTable {
        rows,
        p_space,
        p_space_last,
        p_time,
        p_time_last,
    })
}

fn run_level(case: &MmsCase, grid: &Grid) -> Result<ConvergenceRow> {
    let forcing = case.forcing(grid.n_xi);
    let result = solver::run(&case.params, grid, &case.f_derived, &case.phi_derived, &forcing, &[])?;
    match &result.status {
        RunStatus::Completed => {}
        RunStatus::FrontCollapse { t, s } => return Err(Error::FrontCollapse { t: *t, s: *s }),
        RunStatus::Diverged { t, reason } => {
            return Err(Error::Diverged {
                t: *t,
                reason: format!("level n_xi = {}, dt = {}: {reason}", grid.n_xi, grid.dt),
            })
        }
    }
    let state = &result.final_state;
    let t = state.t;
    let mut err_v: f64 = 0.0;
    for (j, v) in state.v.iter().enumerate() {
        let exact = case.v_bar.eval(&[grid.node(j), t])?;
        err_v = err_v.max((v - exact).abs());
    }
    let err_s = (state.s - case.s_bar.eval1(t)?).abs();
    Ok(ConvergenceRow {
        n_xi: grid.n_xi,
        dt: grid.dt,
        err_v,
        err_s,
    })
}
