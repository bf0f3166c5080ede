use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{DEFAULT_LAYER_FRACTION, DEFAULT_THRESHOLD_FACTOR};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::types::{Grid, Parameters};
use crate::verify::DEFAULT_COMPAT_TOL;

/// One experiment, read from a flat `key = value` file. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: f64,
    pub sigma: f64,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default = "default_s_min")]
    pub s_min: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_xi: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Boundary datum f(t).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_expr: Option<String>,
    /// Initial profile phi(x) on [0, b].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_expr: Option<String>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Initial layer excluded from the regularity probe; defaults to a fraction of `t_end`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_layer: Option<f64>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_threshold_factor")]
    pub threshold_factor: f64,
    #[serde(default = "default_compat_tol")]
    pub compat_tol: f64,
    /// Manufactured front s_bar(t).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mms_s_bar: Option<String>,
    /// Manufactured field v_bar(xi, t).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mms_v_bar: Option<String>,
    #[serde(default = "default_space_levels")]
    pub mms_space_levels: Vec<usize>,
    /// Spatial study uses dt = factor * dxi^2.
    #[serde(default = "default_space_dt_factor")]
    pub mms_space_dt_factor: f64,
    #[serde(default = "default_time_n_xi")]
    pub mms_time_n_xi: usize,
    #[serde(default = "default_time_dts")]
    pub mms_time_dts: Vec<f64>,
}

fn default_s_min() -> f64 {
    Parameters::DEFAULT_S_MIN
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_k_max() -> usize {
    4
}
fn default_threshold_factor() -> f64 {
    DEFAULT_THRESHOLD_FACTOR
}
fn default_compat_tol() -> f64 {
    DEFAULT_COMPAT_TOL
}
fn default_space_levels() -> Vec<usize> {
    vec![32, 64, 128]
}
fn default_space_dt_factor() -> f64 {
    1.0
}
fn default_time_n_xi() -> usize {
    256
}
fn default_time_dts() -> Vec<f64> {
    vec![4e-3, 2e-3, 1e-3]
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn missing(key: &str) -> Error {
        Error::Config(format!("missing key `{key}`"))
    }

    pub fn params(&self) -> Result<Parameters> {
        let b = self.b.ok_or_else(|| Self::missing("b"))?;
        Parameters::with_guard(self.lambda, self.sigma, b, self.t_end, self.s_min)
    }

    pub fn grid(&self) -> Result<Grid> {
        let n = self.n_xi.ok_or_else(|| Self::missing("n_xi"))?;
        let dt = self.dt.ok_or_else(|| Self::missing("dt"))?;
        Grid::new(n, dt)
    }

    pub fn f(&self) -> Result<Expr> {
        Expr::parse(self.f_expr.as_deref().ok_or_else(|| Self::missing("f_expr"))?, &["t"])
    }

    pub fn phi(&self) -> Result<Expr> {
        Expr::parse(self.phi_expr.as_deref().ok_or_else(|| Self::missing("phi_expr"))?, &["x"])
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon_layer.unwrap_or(DEFAULT_LAYER_FRACTION * self.t_end)
    }

    pub fn mms_exprs(&self) -> Result<(Expr, Expr)> {
        let s = self.mms_s_bar.as_deref().ok_or_else(|| Self::missing("mms_s_bar"))?;
        let v = self.mms_v_bar.as_deref().ok_or_else(|| Self::missing("mms_v_bar"))?;
        Ok((Expr::parse(s, &["t"])?, Expr::parse(v, &["xi", "t"])?))
    }

    /// (n_xi, dt) levels of the spatial study.
    pub fn space_levels(&self) -> Vec<(usize, f64)> {
        self.mms_space_levels
            .iter()
            .map(|&n| {
                let h = 1.0 / n as f64;
                (n, self.mms_space_dt_factor * h * h)
            })
            .collect()
    }

    pub fn time_levels(&self) -> Vec<(usize, f64)> {
        self.mms_time_dts.iter().map(|&dt| (self.mms_time_n_xi, dt)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EQUILIBRIUM: &str = r#"
lambda = 1.0
sigma = 1.0
b = 1.915008048154538
t_end = 5.0
n_xi = 128
dt = 1e-3
f_expr = "2"
phi_expr = "2*cosh(1.915008048154538 - x)/cosh(1.915008048154538)"
"#;

    #[test]
    fn parses_with_defaults() {
        let c = RunConfig::from_toml(EQUILIBRIUM).unwrap();
        assert_eq!(c.n_xi, Some(128));
        assert_eq!(c.k_max, 4);
        assert_eq!(c.output_dir, PathBuf::from("out"));
        assert!((c.epsilon() - 0.25).abs() < 1e-15);
        assert!(c.params().is_ok() && c.grid().is_ok() && c.f().is_ok() && c.phi().is_ok());
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = format!("{EQUILIBRIUM}\nlamda = 2.0\n");
        match RunConfig::from_toml(&text) {
            Err(Error::Config(msg)) => assert!(msg.contains("lamda"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_key_is_named() {
        let c = RunConfig::from_toml("lambda = 1.0\nsigma = 1.0\nt_end = 1.0\n").unwrap();
        assert_eq!(c.params().unwrap_err(), Error::Config("missing key `b`".into()));
        assert_eq!(c.f().unwrap_err(), Error::Config("missing key `f_expr`".into()));
    }

    #[test]
    fn round_trips() {
        let mut c = RunConfig::from_toml(EQUILIBRIUM).unwrap();
        c.snapshot_times = vec![0.1, 1.0 / 3.0];
        c.epsilon_layer = Some(0.2);
        c.mms_s_bar = Some("1 + 0.2*sin(t)".into());
        let back = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
