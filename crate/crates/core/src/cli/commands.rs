use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::config::RunConfig;
use super::output::{
    fmt_f64, write_convergence_csv, write_front_csv, write_json, write_series_csv, write_snapshot_csv,
    EquilibriumSummary, Summary,
};
use crate::analysis::{regularity_report, HolderVerdict, RegularityReport};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::solver::{self, Forcing, RunResult, RunStatus};
use crate::types::Parameters;
use crate::verify::{
    compatibility_check, convergence_study, equilibrium_front, equilibrium_residual, make_mms_case,
    CompatReport, ConvergenceTable,
};

pub const EXIT_OK: i32 = 0;
/// Compatibility failure, missing equilibrium, or observed orders below target.
pub const EXIT_FAIL: i32 = 1;
/// Bad configuration, expression, arguments or manufactured field.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COLLAPSE: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

pub const MIN_P_SPACE: f64 = 1.9;
pub const MIN_P_TIME: f64 = 0.9;

/// Exit code for an error that aborted a command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NoEquilibrium { .. } => EXIT_FAIL,
        Error::FrontCollapse { .. } => EXIT_COLLAPSE,
        Error::Diverged { .. } | Error::ZeroPivot { .. } => EXIT_DIVERGED,
        Error::InvalidInput(_)
        | Error::Syntax { .. }
        | Error::UnknownIdentifier { .. }
        | Error::Domain(_)
        | Error::NeumannViolation { .. }
        | Error::Config(_)
        | Error::Io(_) => EXIT_USAGE,
    }
}

pub fn status_exit_code(status: &RunStatus) -> i32 {
    match status {
        RunStatus::Completed => EXIT_OK,
        RunStatus::FrontCollapse { .. } => EXIT_COLLAPSE,
        RunStatus::Diverged { .. } => EXIT_DIVERGED,
    }
}

/// Flags shared by the config-driven commands.
#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub waive_compat: bool,
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn print_compat(report: &CompatReport, out: &mut dyn Write) -> Result<()> {
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    writeln!(out, "{:<width$}  {:>24}  {:>24}  {:>10}  result", "condition", "lhs", "rhs", "gap").map_err(io)?;
    for c in &report.checks {
        let verdict = if c.pass { "pass" } else { "FAIL" };
        writeln!(out, "{:<width$}  {:>24}  {:>24}  {:>10.3e}  {verdict}", c.name, fmt_f64(c.lhs), fmt_f64(c.rhs), c.gap)
            .map_err(io)?;
    }
    writeln!(out, "overall: {}", if report.overall { "pass" } else { "FAIL" }).map_err(io)?;
    Ok(())
}

pub fn cmd_check(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let report = compatibility_check(&cfg.params()?, &cfg.f()?, &cfg.phi()?, cfg.compat_tol)?;
    print_compat(&report, out)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out, "{json}").map_err(io)?;
    Ok(if report.overall { EXIT_OK } else { EXIT_FAIL })
}

/// Refuses incompatible data unless waived. Returns the exit code to stop with.
fn compat_gate(params: &Parameters, f: &Expr, phi: &Expr, cfg: &RunConfig, opts: Options, out: &mut dyn Write) -> Result<Option<i32>> {
    let report = compatibility_check(params, f, phi, cfg.compat_tol)?;
    if report.overall {
        return Ok(None);
    }
    let names: Vec<&str> = report.failures().map(|c| c.name).collect();
    if opts.waive_compat {
        log::warn!("compatibility conditions waived: {}", names.join("; "));
        return Ok(None);
    }
    print_compat(&report, out)?;
    writeln!(out, "refusing to solve incompatible data (use --waive-compat to override)").map_err(io)?;
    Ok(Some(EXIT_FAIL))
}

fn equilibrium_summary(f: &Expr, params: &Parameters, run: &RunResult) -> Option<EquilibriumSummary> {
    if f.depends_on(0) {
        return None;
    }
    let c = f.eval1(0.0).ok()?;
    let s_star = equilibrium_front(c, params.lambda, params.sigma).ok()?;
    let max_deviation = run.series.fronts().iter().map(|s| (s - s_star).abs()).fold(0.0, f64::max);
    Some(EquilibriumSummary { c, s_star, max_deviation })
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))
}

/// Shared by solve and probe: runs, then writes front.csv, snapshots and summary.json.
fn solve_and_write(cfg: &RunConfig, opts: Options, out: &mut dyn Write) -> Result<std::result::Result<RunResult, i32>> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let f = cfg.f()?;
    let phi = cfg.phi()?;
    if let Some(code) = compat_gate(&params, &f, &phi, cfg, opts, out)? {
        return Ok(Err(code));
    }
    prepare_dir(&cfg.output_dir)?;

    let started = Instant::now();
    let run = solver::run(&params, &grid, &f, &phi, &Forcing::none(), &cfg.snapshot_times)?;
    let wall_time = started.elapsed().as_secs_f64();
    log::info!("{} after {} steps in {wall_time:.3} s", run.status.name(), run.series.len() - 1);

    write_front_csv(&cfg.output_dir.join("front.csv"), run.series.rows())?;
    for snap in &run.snapshots {
        write_snapshot_csv(&cfg.output_dir, &grid, snap)?;
    }
    let summary = Summary::new(&run, &grid, params.t_end, equilibrium_summary(&f, &params, &run), wall_time);
    write_json(&cfg.output_dir.join("summary.json"), &summary)?;
    writeln!(out, "status: {}", summary.status).map_err(io)?;
    writeln!(out, "final t: {}  final s: {}", fmt_f64(summary.final_t), fmt_f64(summary.final_s)).map_err(io)?;
    if let Some(t) = summary.collapse_time {
        writeln!(out, "front collapsed at t = {}", fmt_f64(t)).map_err(io)?;
    }
    if let Some(eq) = &summary.equilibrium {
        writeln!(out, "max |s - s*| = {:.3e} (s* = {})", eq.max_deviation, fmt_f64(eq.s_star)).map_err(io)?;
    }
    Ok(Ok(run))
}

pub fn cmd_solve(cfg: &RunConfig, opts: Options, out: &mut dyn Write) -> Result<i32> {
    match solve_and_write(cfg, opts, out)? {
        Ok(run) => Ok(status_exit_code(&run.status)),
        Err(code) => Ok(code),
    }
}

#[derive(Debug, Serialize)]
struct MmsReport<'a> {
    s_bar: &'a str,
    v_bar: &'a str,
    lambda: f64,
    sigma: f64,
    t_end: f64,
    space: &'a ConvergenceTable,
    time: &'a ConvergenceTable,
    space_exact: bool,
    time_exact: bool,
    min_p_space: f64,
    min_p_time: f64,
    pass: bool,
}

pub fn cmd_mms(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let (s_bar, v_bar) = cfg.mms_exprs()?;
    let base = Parameters::with_guard(cfg.lambda, cfg.sigma, cfg.b.unwrap_or(1.0), cfg.t_end, cfg.s_min)?;
    let case = make_mms_case(&s_bar, &v_bar, &base)?;
    prepare_dir(&cfg.output_dir)?;

    let space = convergence_study(&case, &cfg.space_levels())?;
    let time = convergence_study(&case, &cfg.time_levels())?;
    write_convergence_csv(&cfg.output_dir.join("mms_space.csv"), &space)?;
    write_convergence_csv(&cfg.output_dir.join("mms_time.csv"), &time)?;

    let space_ok = space.is_exact() || space.p_space_last.is_some_and(|p| p >= MIN_P_SPACE);
    let time_ok = time.is_exact() || time.p_time.is_some_and(|p| p >= MIN_P_TIME);
    let report = MmsReport {
        s_bar: cfg.mms_s_bar.as_deref().unwrap_or_default(),
        v_bar: cfg.mms_v_bar.as_deref().unwrap_or_default(),
        lambda: cfg.lambda,
        sigma: cfg.sigma,
        t_end: cfg.t_end,
        space: &space,
        time: &time,
        space_exact: space.is_exact(),
        time_exact: time.is_exact(),
        min_p_space: MIN_P_SPACE,
        min_p_time: MIN_P_TIME,
        pass: space_ok && time_ok,
    };
    write_json(&cfg.output_dir.join("mms.json"), &report)?;

    for (label, table) in [("space", &space), ("time", &time)] {
        writeln!(out, "{label} study").map_err(io)?;
        writeln!(out, "{:>6}  {:>12}  {:>12}  {:>12}", "n_xi", "dt", "err_v", "err_s").map_err(io)?;
        for r in &table.rows {
            writeln!(out, "{:>6}  {:>12.4e}  {:>12.4e}  {:>12.4e}", r.n_xi, r.dt, r.err_v, r.err_s).map_err(io)?;
        }
    }
    let show = |p: Option<f64>| p.map_or("n/a".to_string(), |p| format!("{p:.4}"));
    writeln!(
        out,
        "p_space = {} (last pair {}), p_time = {} (last pair {})",
        show(space.p_space),
        show(space.p_space_last),
        show(time.p_time),
        show(time.p_time_last)
    )
    .map_err(io)?;
    if space.is_exact() && time.is_exact() {
        writeln!(out, "manufactured solution reproduced to roundoff").map_err(io)?;
    }
    writeln!(out, "{}", if report.pass { "orders: pass" } else { "orders: FAIL" }).map_err(io)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
}

#[derive(Debug, Serialize)]
struct ProbeReport<'a> {
    f_expr: &'a str,
    #[serde(flatten)]
    report: &'a RegularityReport,
}

pub fn cmd_probe(cfg: &RunConfig, opts: Options, out: &mut dyn Write) -> Result<i32> {
    let run = match solve_and_write(cfg, opts, out)? {
        Ok(run) => run,
        Err(code) => return Ok(code),
    };
    if run.status != RunStatus::Completed {
        return Ok(status_exit_code(&run.status));
    }
    let report = regularity_report(&run.series, cfg.epsilon(), cfg.k_max, cfg.threshold_factor)?;
    for o in &report.orders {
        write_series_csv(&cfg.output_dir.join(format!("deriv_k{}.csv", o.k)), "derivative", &o.scan.derivative)?;
        write_series_csv(&cfg.output_dir.join(format!("mismatch_k{}.csv", o.k)), "mismatch", &o.scan.indicator)?;
    }
    let doc = ProbeReport {
        f_expr: cfg.f_expr.as_deref().unwrap_or_default(),
        report: &report,
    };
    write_json(&cfg.output_dir.join("report.json"), &doc)?;

    writeln!(out, "{:>2}  {:>12}  {:>24}  jumps", "k", "max |d^k s|", "hoelder").map_err(io)?;
    for o in &report.orders {
        let holder = match o.holder.as_ref().map(|h| h.verdict) {
            Some(HolderVerdict::Exponent(l)) => format!("C^{},{l:.3}", o.holder.as_ref().map_or(0, |h| h.order_m)),
            Some(HolderVerdict::BeyondResolution) => "beyond resolution".into(),
            Some(HolderVerdict::Inconclusive) => "inconclusive".into(),
            None => "-".into(),
        };
        let jumps: Vec<String> = o.jumps.iter().map(|j| format!("t={:.6} |J|={:.3e}", j.t, j.magnitude)).collect();
        writeln!(out, "{:>2}  {:>12.4e}  {:>24}  {}", o.k, o.max_derivative, holder, jumps.join(", ")).map_err(io)?;
    }
    if report.firing_orders.is_empty() {
        writeln!(out, "no derivative jumps up to k = {}: consistent with a smooth front", cfg.k_max).map_err(io)?;
    } else {
        writeln!(out, "jump scan fired at orders {:?}", report.firing_orders).map_err(io)?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_equilibrium(c: f64, lambda: f64, sigma: f64, out: &mut dyn Write) -> Result<i32> {
    match equilibrium_front(c, lambda, sigma) {
        Ok(s) => {
            writeln!(out, "s* = {}", fmt_f64(s)).map_err(io)?;
            writeln!(out, "residual = {:.3e}", equilibrium_residual(c, lambda, sigma, s)).map_err(io)?;
            Ok(EXIT_OK)
        }
        Err(e @ Error::NoEquilibrium { .. }) => {
            writeln!(out, "NoEquilibrium: {e}").map_err(io)?;
            Ok(EXIT_FAIL)
        }
        Err(e) => Err(e),
    }
}
