//! Front-fixing time stepper.
//!
//! With `xi = x / s(t)` and `v(xi, t) = u(xi s, t)` the problem lives on `0 <= xi <= 1`:
//!
//! ```text
//! v_t = v_xixi / s^2 + (xi s' / s) v_xi - lambda v + g(xi, t)
//! v(0, t) = f(t),   v_xi(1, t) = 0
//! s'(t) = s (int_0^1 v dxi - sigma) + q(t)
//! ```
//!
//! Each step predicts the front with the current velocity, solves the field implicitly
//! with coefficients frozen at the predicted front, then corrects the front with the
//! trapezoidal (Heun) average of old and predicted velocities.
//!
//! The implicit matrix is strictly diagonally dominant whenever the cell Peclet number
//! satisfies `dxi * s * |s'| <= 2`, and otherwise whenever
//! `dt <= dxi * s / max|xi s'|`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::stencil::{one_sided_derivative_at_0, trapezoid};
use crate::tridiag::thomas_solve;
use crate::types::{FrontRow, FrontSeries, Grid, Parameters, State};

pub type FieldForcing = dyn Fn(f64, f64) -> Result<f64> + Send + Sync;
pub type FrontForcing = dyn Fn(f64) -> Result<f64> + Send + Sync;

/// Optional source terms: `g(xi, t)` in the field equation and `q(t)` in the front law.
#[derive(Default)]
pub struct Forcing {
    pub g: Option<Box<FieldForcing>>,
    pub q: Option<Box<FrontForcing>>,
}

impl Forcing {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_none() && self.q.is_none()
    }

    pub fn g_at(&self, xi: f64, t: f64) -> Result<f64> {
        self.g.as_ref().map_or(Ok(0.0), |g| g(xi, t))
    }

    pub fn q_at(&self, t: f64) -> Result<f64> {
        self.q.as_ref().map_or(Ok(0.0), |q| q(t))
    }
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Forcing")
            .field("g", &self.g.is_some())
            .field("q", &self.q.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status")]
pub enum RunStatus {
    Completed,
    FrontCollapse { t: f64, s: f64 },
    Diverged { t: f64, reason: String },
}

impl RunStatus {
    pub fn name(&self) -> &'static str {
        match self {
            RunStatus::Completed => "Completed",
            RunStatus::FrontCollapse { .. } => "FrontCollapse",
            RunStatus::Diverged { .. } => "Diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub requested: f64,
    pub state: State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub series: FrontSeries,
    pub snapshots: Vec<Snapshot>,
    pub status: RunStatus,
    pub final_state: State,
}

/// Samples `phi` on the initial front and evaluates the initial front velocity.
pub fn init_state(params: &Parameters, phi: &Expr, grid: &Grid) -> Result<State> {
    let v = grid
        .nodes()
        .map(|xi| phi.eval1(xi * params.b))
        .collect::<Result<Vec<_>>>()?;
    let mut state = State {
        t: 0.0,
        s: params.b,
        s_prime: 0.0,
        v,
    };
    state.s_prime = front_velocity(&state, params);
    Ok(state)
}

/// `s (int_0^1 v dxi - sigma)`, the unforced front law in fixed coordinates.
pub fn front_velocity(state: &State, params: &Parameters) -> f64 {
    let dxi = 1.0 / (state.v.len() - 1) as f64;
    let mean = trapezoid(&state.v, dxi).unwrap_or(f64::NAN);
    state.s * (mean - params.sigma)
}

/// Right side of `s'' = (v(1) - lambda - sigma) s' - lambda sigma s - v_xi(0) / s`.
pub fn s_double_prime_rhs(state: &State, params: &Parameters) -> f64 {
    let dxi = 1.0 / (state.v.len() - 1) as f64;
    let v_xi0 = one_sided_derivative_at_0(&state.v, dxi).unwrap_or(f64::NAN);
    let v1 = *state.v.last().unwrap_or(&f64::NAN);
    (v1 - params.lambda - params.sigma) * state.s_prime
        - params.lambda * params.sigma * state.s
        - v_xi0 / state.s
}

/// Advances `state` by `grid.dt`.
pub fn step(state: &State, params: &Parameters, grid: &Grid, f: &Expr, forcing: &Forcing) -> Result<State> {
    advance(state, params, grid.dt, f, forcing)
}

fn advance(state: &State, params: &Parameters, dt: f64, f: &Expr, forcing: &Forcing) -> Result<State> {
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let n = state.v.len() - 1;
    let dxi = 1.0 / n as f64;
    let t1 = state.t + dt;

    let sp = front_velocity(state, params) + forcing.q_at(state.t)?;
    let s_pred = state.s + dt * sp;
    if !s_pred.is_finite() {
        return Err(Error::Diverged {
            t: t1,
            reason: "non-finite front prediction".into(),
        });
    }
    if s_pred < params.s_min {
        return Err(Error::FrontCollapse { t: t1, s: s_pred });
    }

    let diffusion = dt / (s_pred * s_pred * dxi * dxi);
    let diag_value = 1.0 + 2.0 * diffusion + dt * params.lambda;
    let mut lower = Vec::with_capacity(n - 1);
    let mut upper = Vec::with_capacity(n - 1);
    let diag = vec![diag_value; n];
    let mut rhs = Vec::with_capacity(n);
    let boundary = f.eval1(t1)?;
    let mut row0_lower = 0.0;
    for j in 1..=n {
        let xi = j as f64 * dxi;
        let advection = dt * xi * sp / (s_pred * 2.0 * dxi);
        let (lo, up) = if j == n {
            // ghost node v_{n+1} = v_{n-1}
            (-2.0 * diffusion, 0.0)
        } else {
            (-(diffusion - advection), -(diffusion + advection))
        };
        if j == 1 {
            row0_lower = lo;
        } else {
            lower.push(lo);
        }
        if j < n {
            upper.push(up);
        }
        rhs.push(state.v[j] + dt * forcing.g_at(xi, t1)?);
    }
    rhs[0] -= row0_lower * boundary;

    let interior = thomas_solve(&lower, &diag, &upper, &rhs).map_err(|e| Error::Diverged {
        t: t1,
        reason: e.to_string(),
    })?;
    let mut v = Vec::with_capacity(n + 1);
    v.push(boundary);
    v.extend(interior);

    let q1 = forcing.q_at(t1)?;
    let mean = trapezoid(&v, dxi)?;
    let sp_pred = s_pred * (mean - params.sigma) + q1;
    let s_new = state.s + 0.5 * dt * (sp + sp_pred);
    if s_new < params.s_min {
        return Err(Error::FrontCollapse { t: t1, s: s_new });
    }
    let next = State {
        t: t1,
        s: s_new,
        s_prime: s_new * (mean - params.sigma) + q1,
        v,
    };
    if !next.is_finite() {
        return Err(Error::Diverged {
            t: t1,
            reason: "non-finite state".into(),
        });
    }
    Ok(next)
}

/// Extra terms the forcing adds to the second-order front identity:
/// `lambda q + s int_0^1 g dxi + q'`.
fn forcing_identity_terms(state: &State, params: &Parameters, forcing: &Forcing) -> Result<f64> {
    if forcing.is_empty() {
        return Ok(0.0);
    }
    let n = state.v.len() - 1;
    let dxi = 1.0 / n as f64;
    let mut extra = 0.0;
    if forcing.g.is_some() {
        let g = (0..=n)
            .map(|j| forcing.g_at(j as f64 * dxi, state.t))
            .collect::<Result<Vec<_>>>()?;
        extra += state.s * trapezoid(&g, dxi)?;
    }
    if forcing.q.is_some() {
        let h = 1e-5 * state.t.abs().max(1.0);
        let dq = (forcing.q_at(state.t + h)? - forcing.q_at(state.t - h)?) / (2.0 * h);
        extra += params.lambda * forcing.q_at(state.t)? + dq;
    }
    Ok(extra)
}

fn log_row(state: &State, params: &Parameters, forcing: &Forcing) -> Result<FrontRow> {
    let dxi = 1.0 / (state.v.len() - 1) as f64;
    Ok(FrontRow {
        t: state.t,
        s: state.s,
        s_prime: state.s_prime,
        s_dprime_rhs: s_double_prime_rhs(state, params) + forcing_identity_terms(state, params, forcing)?,
        identity_residual: 0.0,
        v_at_0: state.v[0],
        v_xi_at_0: one_sided_derivative_at_0(&state.v, dxi)?,
        v_at_1: state.v[state.v.len() - 1],
    })
}

/// Second derivative from three possibly unevenly spaced samples, located at the middle one.
pub(crate) fn second_difference(t: [f64; 3], s: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    2.0 * ((s[2] - s[1]) / h2 - (s[1] - s[0]) / h1) / (h1 + h2)
}

/// Fills the `identity_residual` column from second differences of the logged front.
/// End rows reuse the stencil of their nearest interior neighbour.
pub fn fill_identity_residuals(series: &mut FrontSeries) {
    let rows = series.rows_mut();
    let n = rows.len();
    if n < 3 {
        for r in rows.iter_mut() {
            r.identity_residual = 0.0;
        }
        return;
    }
    let fd: Vec<f64> = (0..n)
        .map(|i| {
            let c = i.clamp(1, n - 2);
            second_difference(
                [rows[c - 1].t, rows[c].t, rows[c + 1].t],
                [rows[c - 1].s, rows[c].s, rows[c + 1].s],
            )
        })
        .collect();
    for (r, d) in rows.iter_mut().zip(fd) {
        r.identity_residual = (d - r.s_dprime_rhs).abs();
    }
}

/// Number of steps and the time of step `k` for integrating up to `t_end`.
fn schedule(t_end: f64, dt: f64) -> usize {
    if t_end <= 0.0 {
        return 0;
    }
    let ratio = t_end / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        rounded as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Integrates from `t = 0` to `params.t_end`, logging every step.
pub fn run(
    params: &Parameters,
    grid: &Grid,
    f: &Expr,
    phi: &Expr,
    forcing: &Forcing,
    snapshot_times: &[f64],
) -> Result<RunResult> {
    params.validate()?;
    let mut state = init_state(params, phi, grid)?;
    state.s_prime += forcing.q_at(0.0)?;
    run_from(state, params, grid, f, forcing, snapshot_times)
}

/// Like [`run`] but starting from an explicit state at `t = 0`.
pub fn run_from(
    mut state: State,
    params: &Parameters,
    grid: &Grid,
    f: &Expr,
    forcing: &Forcing,
    snapshot_times: &[f64],
) -> Result<RunResult> {
    state.check(grid)?;
    let mut pending: Vec<f64> = snapshot_times
        .iter()
        .copied()
        .filter(|t| *t >= 0.0 && *t <= params.t_end)
        .collect();
    pending.sort_by(f64::total_cmp);
    pending.dedup();
    let mut pending = pending.into_iter().peekable();
    let mut snapshots = Vec::new();
    let snap_slack = 1e-9 * grid.dt;

    let mut series = FrontSeries::new();
    series.push(log_row(&state, params, forcing)?)?;
    while let Some(&tau) = pending.peek() {
        if tau > state.t + snap_slack {
            break;
        }
        snapshots.push(Snapshot { requested: tau, state: state.clone() });
        pending.next();
    }

    let steps = schedule(params.t_end, grid.dt);
    let mut status = RunStatus::Completed;
    for k in 1..=steps {
        let t_target = if k == steps { params.t_end } else { k as f64 * grid.dt };
        let dt = t_target - state.t;
        let next = match advance(&state, params, dt, f, forcing) {
            Ok(mut s) => {
                s.t = t_target;
                s
            }
            Err(Error::FrontCollapse { t, s }) => {
                status = RunStatus::FrontCollapse { t, s };
                break;
            }
            Err(Error::Diverged { t, reason }) => {
                status = RunStatus::Diverged { t, reason };
                break;
            }
            Err(e) => return Err(e),
        };
        state = next;
        series.push(log_row(&state, params, forcing)?)?;
        while let Some(&tau) = pending.peek() {
            if tau > state.t + snap_slack {
                break;
            }
            snapshots.push(Snapshot { requested: tau, state: state.clone() });
            pending.next();
        }
    }
    fill_identity_residuals(&mut series);
    Ok(RunResult {
        series,
        snapshots,
        status,
        final_state: state,
    })
}
