//! Regularity probes on sampled front histories: Hölder-exponent fits from dyadic
//! finite-difference scaling and detection of jumps in k-th derivatives.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::log_log;
use crate::stencil::{backward_weights, central_derivative_series};
use crate::types::{FrontSeries, UniformSeries};

/// Minimum goodness of fit for a reported exponent.
pub const MIN_R2: f64 = 0.95;
/// Slopes within this margin of `m + 1` are indistinguishable from full smoothness.
pub const RESOLUTION_MARGIN: f64 = 0.05;
/// Differences below this multiple of the roundoff floor are treated as zero.
pub const NOISE_MULTIPLE: f64 = 10.0;
pub const DEFAULT_THRESHOLD_FACTOR: f64 = 10.0;
/// Half-width, in samples, of the neighbourhood used for the local median.
pub const LOCAL_WINDOW: usize = 32;
/// Fraction of the final time excluded at the start of a run.
pub const DEFAULT_LAYER_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value")]
pub enum HolderVerdict {
    /// Fitted fractional exponent in `(0, 1)`.
    Exponent(f64),
    BeyondResolution,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub m: usize,
    /// `floor(slope)` when an exponent was fitted, otherwise `m`.
    pub order_m: usize,
    pub verdict: HolderVerdict,
    pub slope: Option<f64>,
    pub fit_r2: Option<f64>,
    /// Smallest and largest scale used by the fit.
    pub fit_window: (f64, f64),
    pub scales: Vec<f64>,
    pub max_differences: Vec<f64>,
    /// Roundoff level of an (m+1)-th difference of the series.
    pub noise_floor: f64,
}

impl HolderEstimate {
    pub fn ell_hat(&self) -> Option<f64> {
        match self.verdict {
            HolderVerdict::Exponent(e) => Some(e),
            _ => None,
        }
    }
}

/// Dyadic step multiples `4, 8, ...` up to an eighth of the series span.
pub fn default_scales(len: usize) -> Vec<usize> {
    let max = (len.saturating_sub(1)) / 8;
    std::iter::successors(Some(4usize), |s| Some(s * 2))
        .take_while(|s| *s <= max)
        .collect()
}

/// Fits `max_c |Delta_h^{m+1} series(c)| ~ h^(m + ell)` over the given scales
/// (multiples of the sample step). Differences are centred on `c` (exactly for even
/// `(m + 1) * scale`, otherwise offset by half a sample), and `c` ranges over the
/// window that admits the largest scale.
pub fn holder_exponent(series: &UniformSeries, m: usize, scales: &[usize]) -> Result<HolderEstimate> {
    let order = m + 1;
    let largest = scales.iter().copied().max().unwrap_or(0);
    if scales.len() < 2 || scales.contains(&0) {
        return Err(Error::InvalidInput("need at least two positive scales".into()));
    }
    if series.len() <= order * largest + 2 * order + 2 {
        return Err(Error::InvalidInput(format!(
            "series of {} samples too short for order-{order} differences at scale {largest}",
            series.len()
        )));
    }
    let w = backward_weights(order);
    let amplitude = series.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let noise_floor = (1u64 << order) as f64 * f64::EPSILON * amplitude.max(f64::MIN_POSITIVE);

    // Centres shared by every scale so that all fits see the same stretch of data.
    let reach = order * largest / 2 + order;
    let centres = reach..series.len() - reach;
    let hs: Vec<f64> = scales.iter().map(|s| *s as f64 * series.step).collect();
    let diffs: Vec<f64> = scales
        .iter()
        .map(|&s| {
            let offset = order * s / 2;
            centres
                .clone()
                .map(|c| {
                    w.iter()
                        .enumerate()
                        .map(|(j, coef)| coef * series.values[c - offset + j * s])
                        .sum::<f64>()
                        .abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();

    let (fit_h, fit_d): (Vec<f64>, Vec<f64>) = hs
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > NOISE_MULTIPLE * noise_floor)
        .map(|(h, d)| (*h, *d))
        .unzip();
    let window = (hs[0], hs[hs.len() - 1]);
    let mut est = HolderEstimate {
        m,
        order_m: m,
        verdict: HolderVerdict::BeyondResolution,
        slope: None,
        fit_r2: None,
        fit_window: window,
        scales: hs.clone(),
        max_differences: diffs.clone(),
        noise_floor,
    };
    if fit_h.len() < 2 {
        return Ok(est);
    }
    est.fit_window = (fit_h[0], fit_h[fit_h.len() - 1]);
    let Some(fit) = log_log(&fit_h, &fit_d) else {
        est.verdict = HolderVerdict::Inconclusive;
        return Ok(est);
    };
    est.slope = Some(fit.slope);
    est.fit_r2 = Some(fit.r2);
    if fit.r2 < MIN_R2 {
        est.verdict = HolderVerdict::Inconclusive;
    } else if fit.slope >= order as f64 - RESOLUTION_MARGIN {
        est.verdict = HolderVerdict::BeyondResolution;
    } else if fit.slope <= 0.0 {
        est.verdict = HolderVerdict::Inconclusive;
    } else {
        let whole = fit.slope.floor();
        est.order_m = whole as usize;
        est.verdict = HolderVerdict::Exponent(fit.slope - whole);
    }
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump {
    pub t: f64,
    /// Right minus left one-sided k-th derivative estimate.
    pub jump: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpScan {
    pub k: usize,
    /// Centred k-th derivative estimate.
    pub derivative: UniformSeries,
    /// One-sided mismatch at every sample with room for both stencils.
    pub indicator: UniformSeries,
    pub median: f64,
    pub noise_floor: f64,
    pub threshold: f64,
    pub detections: Vec<Jump>,
}

/// Scans for jumps in the k-th derivative. Flags samples whose one-sided mismatch
/// exceeds `threshold_factor` times the larger of the median absolute mismatch and the
/// roundoff floor, and also `threshold_factor` times the median over neighbouring
/// samples (excluding the `2k` closest on each side). Runs of flagged samples closer
/// than `k` apart are one detection, located where its mismatch support begins plus
/// `k - 1` samples.
pub fn scan_derivative_jumps(series: &UniformSeries, k: usize, threshold_factor: f64) -> Result<JumpScan> {
    if k == 0 {
        return Err(Error::InvalidInput("derivative order must be >= 1".into()));
    }
    if series.len() < 2 * k + 3 {
        return Err(Error::InvalidInput(format!(
            "series of {} samples too short for order-{k} jump detection",
            series.len()
        )));
    }
    let derivative = central_derivative_series(series, k)?;
    let w = backward_weights(k);
    let hk = series.step.powi(k as i32);
    let n = series.len();
    let mismatch: Vec<f64> = (k..n - k)
        .map(|i| {
            let left: f64 = w.iter().enumerate().map(|(j, c)| c * series.values[i - k + j]).sum();
            let right: f64 = w.iter().enumerate().map(|(j, c)| c * series.values[i + j]).sum();
            (right - left) / hk
        })
        .collect();
    let indicator = UniformSeries::new(series.time(k), series.step, mismatch)?;

    let abs_by_index: Vec<f64> = indicator.values.iter().map(|v| v.abs()).collect();
    let mut abs = abs_by_index.clone();
    abs.sort_by(f64::total_cmp);
    let median = if abs.len() % 2 == 1 {
        abs[abs.len() / 2]
    } else {
        0.5 * (abs[abs.len() / 2 - 1] + abs[abs.len() / 2])
    };
    let amplitude = series.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let noise_floor = (1u64 << (k + 1)) as f64 * f64::EPSILON * amplitude / hk;
    let threshold = threshold_factor * median.max(noise_floor);
    let local_reach = LOCAL_WINDOW.max(8 * k);
    let local_median = |i: usize| {
        let lo = i.saturating_sub(local_reach);
        let hi = (i + local_reach).min(abs_by_index.len() - 1);
        let mut near: Vec<f64> = (lo..=hi)
            .filter(|j| j.abs_diff(i) > 2 * k)
            .map(|j| abs_by_index[j])
            .collect();
        if near.is_empty() {
            return 0.0;
        }
        let mid = near.len() / 2;
        *near.select_nth_unstable_by(mid, f64::total_cmp).1
    };

    let mut detections = Vec::new();
    let mut cluster: Option<(usize, usize, usize)> = None; // (first, best, last) flagged index
    // The mismatch is nonzero from k-1 samples before the break onwards, and peaks
    // late for one-sided singular onsets, so locate at the start of the support.
    let background = median.max(NOISE_MULTIPLE * noise_floor);
    let flush = |c: Option<(usize, usize, usize)>, out: &mut Vec<Jump>| {
        if let Some((first, best, _)) = c {
            let jump = indicator.values[best];
            let mut onset = first;
            while onset > 0 && first - onset < k - 1 && abs_by_index[onset - 1] > background {
                onset -= 1;
            }
            let at = (onset + k - 1).min(indicator.len() - 1);
            out.push(Jump {
                t: indicator.time(at),
                jump,
                magnitude: jump.abs(),
            });
        }
    };
    for (i, v) in indicator.values.iter().enumerate() {
        if v.abs() <= threshold || v.abs() <= threshold_factor * local_median(i) {
            continue;
        }
        cluster = match cluster {
            Some((first, best, last)) if i - last <= k => {
                let best = if v.abs() > indicator.values[best].abs() { i } else { best };
                Some((first, best, i))
            }
            other => {
                flush(other, &mut detections);
                Some((i, i, i))
            }
        };
    }
    flush(cluster, &mut detections);

    Ok(JumpScan {
        k,
        derivative,
        indicator,
        median,
        noise_floor,
        threshold,
        detections,
    })
}

pub fn detect_derivative_jump(series: &UniformSeries, k: usize, threshold_factor: f64) -> Result<Vec<Jump>> {
    Ok(scan_derivative_jumps(series, k, threshold_factor)?.detections)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub k: usize,
    pub max_derivative: f64,
    /// Absent past the first inconclusive order.
    pub holder: Option<HolderEstimate>,
    pub jump_threshold: f64,
    pub jump_noise_floor: f64,
    pub jumps: Vec<Jump>,
    #[serde(skip)]
    pub scan: JumpScan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub epsilon: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub samples: usize,
    pub threshold_factor: f64,
    pub orders: Vec<OrderReport>,
    /// Orders whose jump scan fired.
    pub firing_orders: Vec<usize>,
    /// Largest k such that every order up to k has no jump and a Hölder fit beyond
    /// resolution.
    pub smooth_through: usize,
}

/// Restricts the front column to `t > epsilon` as a uniform series. A shorter final
/// step is dropped.
pub fn front_window(series: &FrontSeries, epsilon: f64) -> Result<UniformSeries> {
    let rows: Vec<_> = series.rows().iter().filter(|r| r.t > epsilon).collect();
    if rows.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "only {} rows after the initial layer {epsilon}",
            rows.len()
        )));
    }
    let step = rows[1].t - rows[0].t;
    let uniform = |a: f64, b: f64| ((b - a) - step).abs() <= 1e-6 * step;
    let mut end = rows.len();
    if !uniform(rows[end - 2].t, rows[end - 1].t) {
        end -= 1;
    }
    if rows[..end].windows(2).any(|w| !uniform(w[0].t, w[1].t)) {
        return Err(Error::InvalidInput("front series is not uniformly sampled".into()));
    }
    UniformSeries::new(rows[0].t, step, rows[..end].iter().map(|r| r.s).collect())
}

pub fn regularity_report(
    series: &FrontSeries,
    epsilon: f64,
    k_max: usize,
    threshold_factor: f64,
) -> Result<RegularityReport> {
    let last_t = series.last().map(|r| r.t).unwrap_or(0.0);
    if !(epsilon >= 0.0 && epsilon < last_t) {
        return Err(Error::InvalidInput(format!(
            "initial layer {epsilon} must lie in [0, {last_t})"
        )));
    }
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be >= 1".into()));
    }
    let s = front_window(series, epsilon)?;
    let scales = default_scales(s.len());

    let mut orders = Vec::with_capacity(k_max);
    let mut holder_open = true;
    for k in 1..=k_max {
        let scan = scan_derivative_jumps(&s, k, threshold_factor)?;
        let max_derivative = scan.derivative.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let holder = if holder_open && scales.len() >= 2 && s.len() > (k + 1) * scales[scales.len() - 1] {
            let h = holder_exponent(&s, k, &scales)?;
            if h.verdict == HolderVerdict::Inconclusive {
                holder_open = false;
            }
            Some(h)
        } else {
            None
        };
        orders.push(OrderReport {
            k,
            max_derivative,
            holder,
            jump_threshold: scan.threshold,
            jump_noise_floor: scan.noise_floor,
            jumps: scan.detections.clone(),
            scan,
        });
    }
    let firing_orders = orders.iter().filter(|o| !o.jumps.is_empty()).map(|o| o.k).collect();
    let smooth_through = orders
        .iter()
        .take_while(|o| {
            o.jumps.is_empty()
                && o.holder.as_ref().map(|h| h.verdict) == Some(HolderVerdict::BeyondResolution)
        })
        .count();
    Ok(RegularityReport {
        epsilon,
        t_start: s.start,
        t_end: s.end(),
        dt: s.step,
        samples: s.len(),
        threshold_factor,
        orders,
        firing_orders,
        smooth_through,
    })
}
