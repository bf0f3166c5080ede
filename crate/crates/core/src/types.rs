//! Domain types shared by the solver and the analysis tools.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and run constants of the free boundary problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    /// Reaction coefficient in `u_t = u_xx - lambda u`.
    pub lambda: f64,
    /// Offset in the front law `s' = int_0^s (u - sigma) dx`.
    pub sigma: f64,
    /// Initial front position `s(0)`.
    pub b: f64,
    /// Final time.
    pub t_end: f64,
    /// Front-collapse guard.
    pub s_min: f64,
}

impl Parameters {
    pub const DEFAULT_S_MIN: f64 = 1e-6;

    pub fn new(lambda: f64, sigma: f64, b: f64, t_end: f64) -> Result<Self> {
        Self::with_guard(lambda, sigma, b, t_end, Self::DEFAULT_S_MIN)
    }

    pub fn with_guard(lambda: f64, sigma: f64, b: f64, t_end: f64, s_min: f64) -> Result<Self> {
        let p = Parameters {
            lambda,
            sigma,
            b,
            t_end,
            s_min,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.lambda > 0.0, "lambda must be > 0"),
            (self.sigma > 0.0, "sigma must be > 0"),
            (self.b > 0.0, "b must be > 0"),
            (self.t_end >= 0.0, "t_end must be >= 0"),
            (self.s_min > 0.0 && self.s_min < self.b, "s_min must satisfy 0 < s_min < b"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidInput(msg.into()));
            }
        }
        if ![self.lambda, self.sigma, self.b, self.t_end, self.s_min]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Uniform grid on the fixed strip `0 <= xi <= 1` plus the time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_xi: usize,
    pub dt: f64,
}

impl Grid {
    pub const MIN_INTERVALS: usize = 8;

    pub fn new(n_xi: usize, dt: f64) -> Result<Self> {
        if n_xi < Self::MIN_INTERVALS {
            return Err(Error::InvalidInput(format!(
                "n_xi must be >= {}, got {n_xi}",
                Self::MIN_INTERVALS
            )));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
        }
        Ok(Grid { n_xi, dt })
    }

    pub fn dxi(&self) -> f64 {
        1.0 / self.n_xi as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.n_xi as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_xi).map(move |j| self.node(j))
    }
}

/// Discrete fixed-domain state: `v[j] = u(xi_j s(t), t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub s: f64,
    pub s_prime: f64,
    pub v: Vec<f64>,
}

impl State {
    pub fn check(&self, grid: &Grid) -> Result<()> {
        if self.v.len() != grid.n_xi + 1 {
            return Err(Error::InvalidInput(format!(
                "state has {} nodes, grid expects {}",
                self.v.len(),
                grid.n_xi + 1
            )));
        }
        if !(self.s > 0.0) {
            return Err(Error::InvalidInput(format!("front must be positive, got {}", self.s)));
        }
        if !self.is_finite() {
            return Err(Error::InvalidInput("state contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.s.is_finite()
            && self.s_prime.is_finite()
            && self.v.iter().all(|x| x.is_finite())
    }

    /// Physical coordinate of every node, `x_j = xi_j s`.
    pub fn physical_nodes(&self) -> Vec<f64> {
        let n = (self.v.len() - 1) as f64;
        (0..self.v.len()).map(|j| j as f64 / n * self.s).collect()
    }
}

/// One logged row of the front history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontRow {
    pub t: f64,
    pub s: f64,
    pub s_prime: f64,
    /// Right side of the second-order front identity evaluated from the discrete state.
    pub s_dprime_rhs: f64,
    /// `|s''_fd - s_dprime_rhs|`, filled in once neighbouring rows exist.
    pub identity_residual: f64,
    pub v_at_0: f64,
    pub v_xi_at_0: f64,
    pub v_at_1: f64,
}

impl FrontRow {
    pub const COLUMNS: [&'static str; 8] =
        ["t", "s", "s_prime", "s_dprime_rhs", "identity_residual", "v0", "vxi0", "v1"];

    pub fn values(&self) -> [f64; 8] {
        [
            self.t,
            self.s,
            self.s_prime,
            self.s_dprime_rhs,
            self.identity_residual,
            self.v_at_0,
            self.v_xi_at_0,
            self.v_at_1,
        ]
    }
}

/// Time-ordered log of the front.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FrontSeries {
    rows: Vec<FrontRow>,
}

impl FrontSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: Vec<FrontRow>) -> Result<Self> {
        if rows.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidInput("series times must be strictly increasing".into()));
        }
        Ok(FrontSeries { rows })
    }

    pub fn push(&mut self, row: FrontRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if !(row.t > last.t) {
                return Err(Error::InvalidInput(format!(
                    "row at t = {} does not follow t = {}",
                    row.t, last.t
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[FrontRow] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [FrontRow] {
        &mut self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn fronts(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.s).collect()
    }

    pub fn last(&self) -> Option<&FrontRow> {
        self.rows.last()
    }
}

/// Samples of a scalar function on a uniform grid `start + i * step`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformSeries {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl UniformSeries {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidInput(format!("series step must be > 0, got {step}")));
        }
        Ok(UniformSeries { start, step, values })
    }

    pub fn sample(start: f64, step: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..n).map(|i| f(start + i as f64 * step)).collect();
        Self::new(start, step, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn end(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }
}
