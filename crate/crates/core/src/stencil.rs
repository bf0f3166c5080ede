//! Quadrature and finite-difference stencils on uniform samples.

use crate::error::{Error, Result};
use crate::types::UniformSeries;

/// Composite trapezoid rule over `values.len() - 1` intervals of width `dx`.
pub fn trapezoid(values: &[f64], dx: f64) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "trapezoid needs at least 2 samples, got {}",
            values.len()
        )));
    }
    if !(dx > 0.0) {
        return Err(Error::InvalidInput(format!("trapezoid spacing must be > 0, got {dx}")));
    }
    let n = values.len();
    let interior: f64 = values[1..n - 1].iter().sum();
    Ok(dx * (0.5 * (values[0] + values[n - 1]) + interior))
}

/// Second-order one-sided estimate of the first derivative at the first sample:
/// `(-3 v0 + 4 v1 - v2) / (2 dx)`.
pub fn one_sided_derivative_at_0(values: &[f64], dx: f64) -> Result<f64> {
    if values.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "one-sided derivative needs at least 3 samples, got {}",
            values.len()
        )));
    }
    if !(dx > 0.0) {
        return Err(Error::InvalidInput(format!("spacing must be > 0, got {dx}")));
    }
    Ok((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx))
}

/// Mirror of [`one_sided_derivative_at_0`] for the last sample.
pub fn one_sided_derivative_at_end(values: &[f64], dx: f64) -> Result<f64> {
    if values.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "one-sided derivative needs at least 3 samples, got {}",
            values.len()
        )));
    }
    let n = values.len();
    Ok((3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dx))
}

/// Weights of the narrowest centred stencil for the `k`-th derivative (unscaled by `h^k`).
///
/// Even orders use the k-fold second difference on `k + 1` points; odd orders compose
/// the `(k - 1)`-fold one with the two-point centred first difference on `k + 2` points.
pub fn central_weights(k: usize) -> Vec<f64> {
    let mut w = vec![1.0];
    for _ in 0..k / 2 {
        w = convolve(&w, &[1.0, -2.0, 1.0]);
    }
    if k % 2 == 1 {
        w = convolve(&w, &[-0.5, 0.0, 0.5]);
    }
    w
}

/// Weights of the backward difference `nabla^k` (unscaled), oldest sample first.
pub fn backward_weights(k: usize) -> Vec<f64> {
    let mut w = vec![1.0];
    for _ in 0..k {
        w = convolve(&w, &[-1.0, 1.0]);
    }
    w
}

pub(crate) fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Centred estimate of the `k`-th derivative at every sample whose stencil fits.
///
/// The result is shorter by `ceil(k / 2)` samples at each end (even `k` trims `k / 2`).
pub fn central_derivative_series(series: &UniformSeries, k: usize) -> Result<UniformSeries> {
    if k == 0 {
        return Err(Error::InvalidInput("derivative order must be >= 1".into()));
    }
    if series.len() < k + 2 {
        return Err(Error::InvalidInput(format!(
            "order-{k} derivative needs at least {} samples, got {}",
            k + 2,
            series.len()
        )));
    }
    let w = central_weights(k);
    let half = w.len() / 2;
    let scale = series.step.powi(k as i32);
    let values = series
        .values
        .windows(w.len())
        .map(|win| win.iter().zip(&w).map(|(f, c)| f * c).sum::<f64>() / scale)
        .collect();
    UniformSeries::new(series.start + half as f64 * series.step, series.step, values)
}
