//! Empirical tails, power-law and lognormal fits, percentiles and kernel
//! density estimates.
//!
//! Power-law exponents come from ordinary least squares on the log-log tail,
//! which is known to be biased for heavy tails but is what the model's
//! calibration uses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{self, linear_regression, mean_std};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TailError {
    #[error("input is empty")]
    EmptyInput,
    #[error("value at index {index} is {value}; entries must be finite and positive")]
    NonPositive { index: usize, value: f64 },
    #[error("tail point {index} breaks ordering: {reason}")]
    InvalidTail { index: usize, reason: &'static str },
    #[error("only {found} usable points in fit window [{lo}, {hi}], need 3")]
    InsufficientPoints { found: usize, lo: f64, hi: f64 },
    #[error("log-wealth has zero variance")]
    ZeroVariance,
    #[error("no tail point has exceedance at or below {0}")]
    PercentileOutOfRange(f64),
    #[error("invalid bandwidth {0}")]
    InvalidBandwidth(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub wealth: f64,
    pub exceedance: f64,
}

/// Points `(w, P(X > w))`, wealth strictly increasing, exceedance non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTail {
    points: Vec<TailPoint>,
    households_total: Option<f64>,
}

impl EmpiricalTail {
    pub fn new(points: Vec<TailPoint>, households_total: Option<f64>) -> Result<Self, TailError> {
        for (i, p) in points.iter().enumerate() {
            if !(p.wealth.is_finite() && p.wealth > 0.0) {
                return Err(TailError::NonPositive { index: i, value: p.wealth });
            }
            if !(0.0..=1.0).contains(&p.exceedance) {
                return Err(TailError::InvalidTail { index: i, reason: "exceedance outside [0, 1]" });
            }
            if i > 0 {
                let q = points[i - 1];
                if p.wealth <= q.wealth {
                    return Err(TailError::InvalidTail { index: i, reason: "wealth not strictly increasing" });
                }
                if p.exceedance > q.exceedance {
                    return Err(TailError::InvalidTail { index: i, reason: "exceedance increases" });
                }
            }
        }
        if let Some(h) = households_total {
            if !(h.is_finite() && h > 0.0) {
                return Err(TailError::NonPositive { index: 0, value: h });
            }
        }
        Ok(EmpiricalTail { points, households_total })
    }

    pub fn points(&self) -> &[TailPoint] {
        &self.points
    }

    pub fn households_total(&self) -> Option<f64> {
        self.households_total
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<TailPoint> {
        self.points
    }

    /// Smallest wealth whose exceedance is at most `p`.
    pub fn percentile(&self, p: f64) -> Result<f64, TailError> {
        if self.points.is_empty() {
            return Err(TailError::EmptyInput);
        }
        let i = self.points.partition_point(|pt| pt.exceedance > p);
        self.points.get(i).map(|pt| pt.wealth).ok_or(TailError::PercentileOutOfRange(p))
    }

    /// Piecewise-constant inverse CDF at `u ∈ (0, 1]`. Values of `u` below the
    /// mass the tail accounts for map to its largest point.
    pub fn inverse_cdf(&self, u: f64) -> Option<f64> {
        let last = self.points.last()?;
        Some(self.percentile(1.0 - u).unwrap_or(last.wealth))
    }
}

/// `(count of entries > x_i)/N` at each distinct sample value.
pub fn empirical_tail(sample: &[f64]) -> Result<EmpiricalTail, TailError> {
    if sample.is_empty() {
        return Err(TailError::EmptyInput);
    }
    if let Some((index, &value)) = sample.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
        return Err(TailError::NonPositive { index, value });
    }
    let mut sorted = sample.to_vec();
    sorted.par_sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let mut points = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted[j] == sorted[i] {
            j += 1;
        }
        points.push(TailPoint { wealth: sorted[i], exceedance: (n - j) as f64 / n as f64 });
        i = j;
    }
    Ok(EmpiricalTail { points, households_total: Some(n as f64) })
}

/// Smallest sample value whose empirical exceedance is at most `p`.
pub fn percentile_wealth(sample: &[f64], p: f64) -> Result<f64, TailError> {
    empirical_tail(sample)?.percentile(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
}

impl FitWindow {
    /// From the 99th-percentile wealth to the largest wealth still exceeded by
    /// at least ten households. Without a household count the smallest
    /// positive exceedance stands in for `1/N`.
    pub fn default_for(tail: &EmpiricalTail) -> Result<Self, TailError> {
        let lo = tail.percentile(0.01)?;
        let unit = match tail.households_total() {
            Some(h) => 1.0 / h,
            None => tail
                .points()
                .iter()
                .map(|p| p.exceedance)
                .filter(|&e| e > 0.0)
                .fold(f64::INFINITY, f64::min),
        };
        let hi = tail
            .points()
            .iter()
            .rev()
            .find(|p| p.exceedance >= 10.0 * unit * (1.0 - 1e-12))
            .map_or(lo, |p| p.wealth);
        Ok(FitWindow { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha_coef: f64,
    pub beta: f64,
    pub window: FitWindow,
    pub r_squared: f64,
    pub n_points: usize,
}

impl PowerLawFit {
    pub fn exceedance(&self, w: f64) -> f64 {
        self.alpha_coef * w.powf(-self.beta)
    }
}

/// Least squares on `(ln w, ln P)` for tail points inside `window` with positive exceedance.
pub fn fit_power_law(tail: &EmpiricalTail, window: FitWindow) -> Result<PowerLawFit, TailError> {
    let (x, y): (Vec<f64>, Vec<f64>) = tail
        .points()
        .iter()
        .filter(|p| p.wealth >= window.lo && p.wealth <= window.hi && p.exceedance > 0.0)
        .map(|p| (p.wealth.ln(), p.exceedance.ln()))
        .unzip();
    if x.len() < 3 {
        return Err(TailError::InsufficientPoints { found: x.len(), lo: window.lo, hi: window.hi });
    }
    let (intercept, slope, r_squared) = linear_regression(&x, &y);
    Ok(PowerLawFit { alpha_coef: intercept.exp(), beta: -slope, window, r_squared, n_points: x.len() })
}

/// [`fit_power_law`] with [`FitWindow::default_for`].
pub fn fit_power_law_default(tail: &EmpiricalTail) -> Result<PowerLawFit, TailError> {
    fit_power_law(tail, FitWindow::default_for(tail)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalFit {
    pub mu_log: f64,
    pub sigma_log: f64,
    pub ks_distance: f64,
}

/// Moments of log-wealth plus the KS distance to the implied lognormal.
pub fn fit_lognormal(sample: &[f64]) -> Result<LognormalFit, TailError> {
    if sample.is_empty() {
        return Err(TailError::EmptyInput);
    }
    let mut logs = Vec::with_capacity(sample.len());
    for (index, &w) in sample.iter().enumerate() {
        if !(w.is_finite() && w > 0.0) {
            return Err(TailError::NonPositive { index, value: w });
        }
        logs.push(w.ln());
    }
    let (mu_log, sigma_log) = mean_std(&logs);
    if !(sigma_log > 0.0) {
        return Err(TailError::ZeroVariance);
    }
    logs.par_sort_unstable_by(f64::total_cmp);
    let ks_distance = numeric::ks_distance_sorted(&logs, |x| numeric::std_normal_cdf((x - mu_log) / sigma_log));
    Ok(LognormalFit { mu_log, sigma_log, ks_distance })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

/// Reference-rule bandwidth `1.06·σ·N^(−1/5)`.
pub fn reference_bandwidth(sample: &[f64]) -> f64 {
    let (_, sd) = mean_std(sample);
    1.06 * sd * (sample.len() as f64).powf(-0.2)
}

/// Gaussian kernel density on `grid_points` evenly spaced points covering the
/// data plus four bandwidths each side. `bandwidth = None` uses
/// [`reference_bandwidth`].
pub fn kernel_density(sample: &[f64], bandwidth: Option<f64>, grid_points: usize) -> Result<DensityCurve, TailError> {
    if sample.is_empty() {
        return Err(TailError::EmptyInput);
    }
    let h = bandwidth.unwrap_or_else(|| reference_bandwidth(sample));
    if !(h.is_finite() && h > 0.0) {
        return Err(TailError::InvalidBandwidth(h));
    }
    let grid_points = grid_points.max(2);
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = sorted[0] - 4.0 * h;
    let hi = sorted[sorted.len() - 1] + 4.0 * h;
    let dx = (hi - lo) / (grid_points - 1) as f64;
    let x: Vec<f64> = (0..grid_points).map(|i| lo + dx * i as f64).collect();
    let norm = 1.0 / (sorted.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    // Kernels beyond 9 bandwidths contribute below 1e-17 relative.
    let reach = 9.0 * h;
    let density = x
        .par_iter()
        .map(|&g| {
            let a = sorted.partition_point(|&v| v < g - reach);
            let b = sorted.partition_point(|&v| v <= g + reach);
            let s = numeric::compensated_sum(sorted[a..b].iter().map(|&v| {
                let z = (g - v) / h;
                (-0.5 * z * z).exp()
            }));
            s * norm
        })
        .collect();
    Ok(DensityCurve { x, density, bandwidth: h })
}
