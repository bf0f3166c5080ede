use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::{RunResult, RunStatus, Snapshot};
use crate::types::{FrontRow, Grid, UniformSeries};
use crate::verify::ConvergenceTable;

/// Every float is written with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes a header plus rows of floats, comma separated with LF line endings.
pub fn write_csv<'a, I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row.iter().map(|x| fmt_f64(*x))).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value).map_err(|e| Error::Io(e.to_string()))?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn write_front_csv(path: &Path, rows: &[FrontRow]) -> Result<()> {
    let values: Vec<[f64; 8]> = rows.iter().map(FrontRow::values).collect();
    write_csv(path, &FrontRow::COLUMNS, values.iter().map(|r| &r[..]))
}

/// `snap_<t>.csv`, using the shortest decimal form of the requested time.
pub fn snapshot_name(requested: f64) -> String {
    format!("snap_{requested}.csv")
}

pub fn write_snapshot_csv(dir: &Path, grid: &Grid, snap: &Snapshot) -> Result<PathBuf> {
    let path = dir.join(snapshot_name(snap.requested));
    let x = snap.state.physical_nodes();
    let rows: Vec<[f64; 3]> = snap
        .state
        .v
        .iter()
        .zip(x)
        .enumerate()
        .map(|(j, (v, x))| [grid.node(j), x, *v])
        .collect();
    write_csv(&path, &["xi", "x", "v"], rows.iter().map(|r| &r[..]))?;
    Ok(path)
}

pub fn write_series_csv(path: &Path, column: &str, series: &UniformSeries) -> Result<()> {
    let rows: Vec<[f64; 2]> = series
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| [series.time(i), *v])
        .collect();
    write_csv(path, &["t", column], rows.iter().map(|r| &r[..]))
}

pub fn write_convergence_csv(path: &Path, table: &ConvergenceTable) -> Result<()> {
    let rows: Vec<[f64; 4]> = table
        .rows
        .iter()
        .map(|r| [r.n_xi as f64, r.dt, r.err_v, r.err_s])
        .collect();
    write_csv(path, &["n_xi", "dt", "err_v", "err_s"], rows.iter().map(|r| &r[..]))
}

/// Steady state predicted by a time-independent boundary datum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSummary {
    pub c: f64,
    pub s_star: f64,
    pub max_deviation: f64,
}

/// Contents of `summary.json`; field order is the serialised key order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub status: &'static str,
    pub n_xi: usize,
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    pub final_t: f64,
    pub final_s: f64,
    pub max_identity_residual: f64,
    pub collapse_time: Option<f64>,
    pub divergence_reason: Option<String>,
    pub equilibrium: Option<EquilibriumSummary>,
    pub wall_time: f64,
}

impl Summary {
    pub fn new(run: &RunResult, grid: &Grid, t_end: f64, equilibrium: Option<EquilibriumSummary>, wall_time: f64) -> Self {
        let rows = run.series.rows();
        let max_identity_residual = rows
            .iter()
            .map(|r| r.identity_residual)
            .filter(|r| r.is_finite())
            .fold(0.0, f64::max);
        let (collapse_time, divergence_reason) = match &run.status {
            RunStatus::Completed => (None, None),
            RunStatus::FrontCollapse { t, .. } => (Some(*t), None),
            RunStatus::Diverged { reason, .. } => (None, Some(reason.clone())),
        };
        Summary {
            status: run.status.name(),
            n_xi: grid.n_xi,
            dt: grid.dt,
            t_end,
            steps: rows.len().saturating_sub(1),
            final_t: run.final_state.t,
            final_s: run.final_state.s,
            max_identity_residual,
            collapse_time,
            divergence_reason,
            equilibrium,
            wall_time,
        }
    }
}
