//! Shifted and scaled noncentral-t, plus the Pareto and exponential laws used
//! for initial conditions.
//!
//! The noncentral-t variable is `s·U + l` with `U = (Z + c)/√(V/k)`, `Z`
//! standard normal and `V ~ χ²(k)`. Its density has no elementary closed form;
//! [`nct_pdf`] integrates the mixture over `V` numerically. Maximum-likelihood
//! fitting goes through [`NctLogDensity`], an equivalent one-dimensional
//! representation that can be tabulated once per parameter vector.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{self, integrate, ln_gamma, nelder_mead, NeumaierSum, NelderMeadOptions};
use crate::rng::RngStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("need at least {needed} finite observations, got {found}")]
    InsufficientData { needed: usize, found: usize },
    #[error("fit did not converge after {iterations} iterations (best log-likelihood {log_likelihood})")]
    FitDidNotConverge { best: NctParams, log_likelihood: f64, iterations: usize },
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), DistError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(DistError::InvalidParameter { name, value, reason })
    }
}

/// Parameters of `s·U + l`, `U` noncentral-t with `k` degrees of freedom and centrality `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NctParams {
    pub k: f64,
    pub c: f64,
    pub l: f64,
    pub s: f64,
}

impl NctParams {
    /// Billionaire fit used for every simulation run.
    pub const BILLIONAIRE: NctParams = NctParams { k: 2.008, c: 0.941, l: -0.00156, s: 0.0112 };
    /// Fit to survey percentile coefficients.
    pub const SURVEY: NctParams = NctParams { k: 6.03, c: 0.0573, l: -0.00575, s: 0.0112 };

    pub fn new(k: f64, c: f64, l: f64, s: f64) -> Result<Self, DistError> {
        let p = NctParams { k, c, l, s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DistError> {
        check("k", self.k, self.k > 0.0, "degrees of freedom must be positive")?;
        check("c", self.c, true, "centrality must be finite")?;
        check("l", self.l, true, "shift must be finite")?;
        check("s", self.s, self.s > 0.0, "scale must be positive")
    }

    /// `E[U]` for the unshifted variable, defined for `k > 1`.
    pub fn standard_mean(&self) -> Option<f64> {
        (self.k > 1.0).then(|| {
            let k = self.k;
            self.c * (k / 2.0).sqrt() * (ln_gamma((k - 1.0) / 2.0) - ln_gamma(k / 2.0)).exp()
        })
    }

    pub fn mean(&self) -> Option<f64> {
        self.standard_mean().map(|m| self.l + self.s * m)
    }

    /// Defined for `k > 2`.
    pub fn variance(&self) -> Option<f64> {
        if self.k <= 2.0 {
            return None;
        }
        let m = self.standard_mean()?;
        let k = self.k;
        Some(self.s * self.s * (k * (1.0 + self.c * self.c) / (k - 2.0) - m * m))
    }
}

/// Sampler for `nct(k, c, l, s)`. Construct once and reuse; the chi-square
/// stage is the gamma route so non-integer `k` is exact.
#[derive(Debug, Clone, Copy)]
pub struct Nct {
    params: NctParams,
    chi: ChiSquared<f64>,
}

impl Nct {
    pub fn new(params: NctParams) -> Result<Self, DistError> {
        params.validate()?;
        let chi = ChiSquared::new(params.k).map_err(|_| DistError::InvalidParameter {
            name: "k",
            value: params.k,
            reason: "chi-square construction failed",
        })?;
        Ok(Nct { params, chi })
    }

    pub fn params(&self) -> NctParams {
        self.params
    }
}

impl Distribution<f64> for Nct {
    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        let v = self.chi.sample(rng);
        let u = (z + self.params.c) / (v / self.params.k).sqrt();
        self.params.s * u + self.params.l
    }
}

/// One draw of `nct(params)` from `rng`.
pub fn sample_nct(params: &NctParams, rng: &mut RngStream) -> f64 {
    Nct::new(*params).expect("validated parameters").sample(rng)
}

/// Log of the integrand of the mixture over `y = ln V` at standardised point `t`.
fn mixture_log_integrand(k: f64, c: f64, t: f64, y: f64, log_norm: f64) -> f64 {
    let v = y.exp();
    let root = (v / k).sqrt();
    let d = t * root - c;
    0.5 * k * y - 0.5 * v + root.ln() - 0.5 * d * d + log_norm
}

fn mixture_bounds(k: f64, c: f64, t: f64) -> (f64, f64) {
    let lo = k.ln() - 2.0 * (1.0 + t.abs()).ln() - (1.0 + c * c).ln() - 80.0 / (k + 1.0) - 5.0;
    let hi = (k + 12.0 * (2.0 * k).sqrt() + 100.0 + c * c * k).ln();
    (lo, hi)
}

fn locate_peak<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    const GRID: usize = 256;
    let h = (hi - lo) / GRID as f64;
    let mut best = (lo, f(lo));
    for i in 1..=GRID {
        let y = lo + h * i as f64;
        let v = f(y);
        if v > best.1 {
            best = (y, v);
        }
    }
    let a = (best.0 - h).max(lo);
    let b = (best.0 + h).min(hi);
    let (y, neg) = numeric::golden_section(|y| -f(y), a, b, 1e-10 * (1.0 + best.0.abs()));
    if -neg > best.1 { (y, -neg) } else { best }
}

/// Density of `nct(params)` at `x`, by adaptive integration over the chi-square variable.
pub fn nct_pdf(params: &NctParams, x: f64) -> f64 {
    let NctParams { k, c, l, s } = *params;
    let t = (x - l) / s;
    let log_norm = -0.5 * k * std::f64::consts::LN_2
        - ln_gamma(0.5 * k)
        - 0.5 * (2.0 * std::f64::consts::PI).ln();
    let f = |y: f64| mixture_log_integrand(k, c, t, y, log_norm);
    let (lo, hi) = mixture_bounds(k, c, t);
    let (peak_y, peak) = locate_peak(&f, lo, hi);
    let g = |y: f64| (f(y) - peak).exp();
    let left = integrate(g, lo, peak_y, 1e-10, 1e-12, 400);
    let right = integrate(g, peak_y, hi, 1e-10, 1e-12, 400);
    (left.value + right.value) * peak.exp() / s
}

/// Distribution function of `nct(params)` at `x`, by the same mixture.
pub fn nct_cdf(params: &NctParams, x: f64) -> f64 {
    let NctParams { k, c, l, s } = *params;
    let t = (x - l) / s;
    let log_norm = -0.5 * k * std::f64::consts::LN_2 - ln_gamma(0.5 * k);
    let w = |y: f64| {
        let v = y.exp();
        let lw = 0.5 * k * y - 0.5 * v + log_norm;
        lw.exp() * numeric::std_normal_cdf(t * (v / k).sqrt() - c)
    };
    let mid = k.ln();
    let lo = mid.min(0.0) - 70.0 / k - 5.0;
    let hi = (k + 12.0 * (2.0 * k).sqrt() + 100.0).ln();
    let a = integrate(w, lo, mid, 1e-13, 1e-12, 400);
    let b = integrate(w, mid, hi, 1e-13, 1e-12, 400);
    (a.value + b.value).clamp(0.0, 1.0)
}

const CHEB_NODES: usize = 40;
const TABLE_INTERVALS: usize = 2048;

/// `ln ∫_0^∞ q^k exp(-q²/2 + a q) dq`, by quadrature.
fn log_g_quadrature(k: f64, a: f64) -> f64 {
    let q_peak = 0.5 * (a + (a * a + 4.0 * k).sqrt());
    let lf = |q: f64| if q > 0.0 { k * q.ln() - 0.5 * q * q + a * q } else { f64::NEG_INFINITY };
    let peak = lf(q_peak);
    let g = |q: f64| (lf(q) - peak).exp();
    let width = 1.0 / (1.0 + k / (q_peak * q_peak)).sqrt();
    let left = integrate(g, 0.0, q_peak, 1e-15, 1e-14, 400);
    let right = integrate(g, q_peak, q_peak + 40.0 * width + 10.0, 1e-15, 1e-14, 400);
    peak + (left.value + right.value).ln()
}

/// Fast log-density of `nct(params)`, prepared once per parameter vector.
///
/// Uses `f_U(t) = C_k (k+t²)^{-(k+1)/2} e^{-c²/2} G_k(a)` with
/// `a = c t/√(k+t²)` and `G_k(a) = ∫_0^∞ q^k e^{-q²/2 + a q} dq`. Because
/// `|a| < |c|`, `ln G_k` only has to be known on a fixed interval: it is
/// computed by quadrature at Chebyshev nodes and tabulated for cubic
/// interpolation. Agrees with [`nct_pdf`] to better than 1e-9 relative.
#[derive(Debug, Clone)]
pub struct NctLogDensity {
    params: NctParams,
    log_const: f64,
    half_range: f64,
    table: Vec<f64>,
}

impl NctLogDensity {
    pub fn new(params: NctParams) -> Result<Self, DistError> {
        params.validate()?;
        let NctParams { k, c, s, .. } = params;
        let half_range = c.abs().max(1e-3) * (1.0 + 1e-9);
        // Chebyshev interpolant of ln G on [-A, A].
        let nodes: Vec<f64> = (0..CHEB_NODES)
            .map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / CHEB_NODES as f64).cos())
            .collect();
        let values: Vec<f64> = nodes.iter().map(|&z| log_g_quadrature(k, half_range * z)).collect();
        let coeffs: Vec<f64> = (0..CHEB_NODES)
            .map(|m| {
                let s: f64 = (0..CHEB_NODES)
                    .map(|j| {
                        values[j]
                            * (std::f64::consts::PI * m as f64 * (j as f64 + 0.5) / CHEB_NODES as f64).cos()
                    })
                    .sum();
                2.0 * s / CHEB_NODES as f64
            })
            .collect();
        let cheb = |z: f64| {
            let (mut b1, mut b2) = (0.0, 0.0);
            for &cm in coeffs.iter().skip(1).rev() {
                let b0 = 2.0 * z * b1 - b2 + cm;
                b2 = b1;
                b1 = b0;
            }
            z * b1 - b2 + 0.5 * coeffs[0]
        };
        // One guard node on each side for the 4-point stencil.
        let table: Vec<f64> = (0..=TABLE_INTERVALS + 2)
            .map(|i| {
                let z = -1.0 + 2.0 * (i as f64 - 1.0) / TABLE_INTERVALS as f64;
                cheb(z)
            })
            .collect();
        let log_const = std::f64::consts::LN_2 + 0.5 * k * k.ln()
            - 0.5 * k * std::f64::consts::LN_2
            - ln_gamma(0.5 * k)
            - 0.5 * (2.0 * std::f64::consts::PI).ln()
            - 0.5 * c * c
            - s.ln();
        Ok(NctLogDensity { params, log_const, half_range, table })
    }

    pub fn params(&self) -> NctParams {
        self.params
    }

    #[inline]
    fn log_g(&self, a: f64) -> f64 {
        let u = (a / self.half_range + 1.0) * 0.5 * TABLE_INTERVALS as f64;
        let i = (u.floor() as isize).clamp(0, TABLE_INTERVALS as isize - 1) as usize;
        let x = u - i as f64;
        // Table index i+1 holds grid point i.
        let (p0, p1, p2, p3) = (self.table[i], self.table[i + 1], self.table[i + 2], self.table[i + 3]);
        // Cubic Lagrange through grid points i-1, i, i+1, i+2 at offset x from i.
        let xm1 = x + 1.0;
        let xp1 = x - 1.0;
        let xp2 = x - 2.0;
        -p0 * x * xp1 * xp2 / 6.0 + p1 * xm1 * xp1 * xp2 / 2.0 - p2 * xm1 * x * xp2 / 2.0
            + p3 * xm1 * x * xp1 / 6.0
    }

    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let NctParams { k, c, l, s } = self.params;
        let t = (x - l) / s;
        let q = k + t * t;
        let a = c * t / q.sqrt();
        self.log_const - 0.5 * (k + 1.0) * q.ln() + self.log_g(a)
    }

    /// Sum of log-densities over `data`, in fixed-size chunks so the result is
    /// identical for any thread count.
    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        const CHUNK: usize = 8192;
        let partial: Vec<f64> = data
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = NeumaierSum::new();
                for &x in chunk {
                    acc.add(self.ln_pdf(x));
                }
                acc.value()
            })
            .collect();
        numeric::compensated_sum(partial)
    }
}

/// Result of [`fit_nct_mle`].
#[derive(Debug, Clone, PartialEq)]
pub struct NctFit {
    pub params: NctParams,
    pub log_likelihood: f64,
    /// Log-likelihood of the full data at each multi-start initial point.
    pub start_log_likelihoods: Vec<f64>,
    pub iterations: usize,
}

const MIN_FIT_DATA: usize = 50;
const SUBSAMPLE: usize = 20_000;

fn theta_to_params(theta: &[f64]) -> Option<NctParams> {
    let k = theta[0].exp();
    let s = theta[3].exp();
    if !(0.05..=1e4).contains(&k) || theta[1].abs() > 20.0 || !s.is_finite() || s <= 0.0 {
        return None;
    }
    NctParams::new(k, theta[1], theta[2], s).ok()
}

fn params_to_theta(p: &NctParams) -> [f64; 4] {
    [p.k.ln(), p.c, p.l, p.s.ln()]
}

fn mean_neg_ll(theta: &[f64], data: &[f64]) -> f64 {
    match theta_to_params(theta).and_then(|p| NctLogDensity::new(p).ok()) {
        Some(d) => -d.log_likelihood(data) / data.len() as f64,
        None => f64::INFINITY,
    }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// Deterministic multi-start seeds: a quantile-based guess plus seven perturbations.
fn starting_points(data: &[f64]) -> Option<Vec<NctParams>> {
    let mut sorted: Vec<f64> = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let med = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let spread = if iqr > 0.0 { iqr / 1.5 } else { numeric::mean_std(data).1 };
    if !(spread > 0.0) {
        return None;
    }
    let bowley = if iqr > 0.0 { (q3 + q1 - 2.0 * med) / iqr } else { 0.0 };
    let c0 = (3.0 * bowley).clamp(-3.0, 3.0);
    let mk = |k: f64, c: f64, scale: f64| NctParams { k, c, l: med - spread * scale * c, s: spread * scale };
    Some(vec![
        mk(4.0, c0, 1.0),
        mk(2.5, c0, 1.0),
        mk(10.0, c0, 1.0),
        mk(4.0, c0 + 0.5, 1.0),
        mk(4.0, c0 - 0.5, 1.0),
        mk(2.5, c0 + 1.0, 0.8),
        mk(20.0, 0.0, 1.0),
        mk(4.0, c0, 1.5),
    ])
}

/// Maximum-likelihood fit of `nct(k, c, l, s)`.
///
/// Each of the eight deterministic starts is refined by Nelder-Mead on a
/// fixed, evenly strided subsample; the best candidate (judged on the full
/// data, together with the raw starts) is then polished on the full data.
/// Convergence is declared when the mean log-likelihood spread of the simplex
/// is below 1e-8.
pub fn fit_nct_mle(data: &[f64]) -> Result<NctFit, DistError> {
    let finite: Vec<f64> = data.iter().copied().filter(|x| x.is_finite()).collect();
    if finite.len() < MIN_FIT_DATA {
        return Err(DistError::InsufficientData { needed: MIN_FIT_DATA, found: finite.len() });
    }
    let starts = match starting_points(&finite) {
        Some(s) => s,
        None => {
            let v = finite[0];
            return Err(DistError::FitDidNotConverge {
                best: NctParams { k: 4.0, c: 0.0, l: v, s: f64::MIN_POSITIVE },
                log_likelihood: f64::INFINITY,
                iterations: 0,
            });
        }
    };

    let stride = finite.len().div_ceil(SUBSAMPLE).max(1);
    let sub: Vec<f64> = finite.iter().step_by(stride).copied().collect();
    let coarse = NelderMeadOptions { ftol: 1e-7, xtol: 1e-4, max_iter: 1500 };

    let mut candidates: Vec<[f64; 4]> = Vec::with_capacity(2 * starts.len());
    let mut start_lls = Vec::with_capacity(starts.len());
    for p in &starts {
        let theta = params_to_theta(p);
        start_lls.push(-mean_neg_ll(&theta, &finite) * finite.len() as f64);
        candidates.push(theta);
        if stride > 1 {
            let m = nelder_mead(|th| mean_neg_ll(th, &sub), &theta, &[0.3, 0.3, 0.3 * p.s, 0.3], coarse);
            candidates.push([m.x[0], m.x[1], m.x[2], m.x[3]]);
        }
    }
    let mut best = candidates[0];
    let mut best_f = f64::INFINITY;
    for th in &candidates {
        let f = mean_neg_ll(th, &finite);
        if f < best_f {
            best_f = f;
            best = *th;
        }
    }

    let s_best = best[3].exp();
    let steps = if stride > 1 { [0.05, 0.05, 0.05 * s_best, 0.05] } else { [0.3, 0.3, 0.3 * s_best, 0.3] };
    let polished = nelder_mead(
        |th| mean_neg_ll(th, &finite),
        &best,
        &steps,
        NelderMeadOptions { ftol: 1e-8, xtol: 1e-6, max_iter: 4000 },
    );
    let n = finite.len() as f64;
    let params = theta_to_params(&polished.x).unwrap_or(starts[0]);
    let ll = -polished.f * n;
    if !polished.converged {
        return Err(DistError::FitDidNotConverge { best: params, log_likelihood: ll, iterations: polished.iterations });
    }
    Ok(NctFit { params, log_likelihood: ll, start_log_likelihoods: start_lls, iterations: polished.iterations })
}

/// Pareto law with `P(X > x) = (x_m/x)^β` for `x ≥ x_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoParams {
    pub x_m: f64,
    pub beta: f64,
}

impl ParetoParams {
    pub fn new(x_m: f64, beta: f64) -> Result<Self, DistError> {
        check("x_m", x_m, x_m > 0.0, "cutoff must be positive")?;
        check("beta", beta, beta > 0.0, "tail exponent must be positive")?;
        Ok(ParetoParams { x_m, beta })
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x < self.x_m { 1.0 } else { (self.x_m / x).powf(self.beta) }
    }
}

/// Inverse-transform draw from `Pareto(x_m, β)`.
pub fn sample_pareto(params: &ParetoParams, rng: &mut RngStream) -> f64 {
    params.x_m * rng.uniform_open_closed().powf(-1.0 / params.beta)
}

/// Inverse-transform draw from an exponential with the given rate (mean `1/rate`).
pub fn sample_exponential(rate: f64, rng: &mut RngStream) -> f64 {
    -rng.uniform_open_closed().ln() / rate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Lane;

    fn stream(i: u32) -> RngStream {
        RngStream::for_agent(2024, i, 0, Lane::AUXILIARY)
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(NctParams::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(NctParams::new(1.0, 0.0, 0.0, -1.0).is_err());
        assert!(NctParams::new(1.0, f64::NAN, 0.0, 1.0).is_err());
        assert!(ParetoParams::new(0.0, 2.0).is_err());
        assert!(ParetoParams::new(1.0, 0.0).is_err());
    }

    #[test]
    fn cauchy_density_at_zero() {
        // c = 0, k = 1 is the standard Cauchy law.
        let p = NctParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let f = nct_pdf(&p, 0.0);
        assert!((f - 1.0 / std::f64::consts::PI).abs() < 1e-10, "{f}");
        let f2 = nct_pdf(&p, 3.0);
        assert!((f2 - 1.0 / (std::f64::consts::PI * 10.0)).abs() < 1e-10);
    }

    #[test]
    fn central_case_is_symmetric() {
        let p = NctParams::new(3.7, 0.0, 0.25, 2.0).unwrap();
        for d in [0.1, 1.0, 7.5, 80.0] {
            let a = nct_pdf(&p, 0.25 + d);
            let b = nct_pdf(&p, 0.25 - d);
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{d}: {a} vs {b}");
        }
    }

    #[test]
    fn student_t_closed_form() {
        let k: f64 = 5.0;
        let p = NctParams::new(k, 0.0, 0.0, 1.0).unwrap();
        let norm = (ln_gamma((k + 1.0) / 2.0) - ln_gamma(k / 2.0)).exp() / (k * std::f64::consts::PI).sqrt();
        for t in [0.0, 0.5, 2.0, 10.0] {
            let exact = norm * (1.0 + t * t / k).powf(-(k + 1.0) / 2.0);
            assert!((nct_pdf(&p, t) / exact - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fast_log_density_matches_quadrature() {
        for p in [NctParams::BILLIONAIRE, NctParams::SURVEY, NctParams { k: 0.7, c: -2.5, l: 1.0, s: 3.0 }] {
            let fast = NctLogDensity::new(p).unwrap();
            for i in -40..=40 {
                let x = p.l + p.s * (i as f64).powi(3) / 50.0;
                let slow = nct_pdf(&p, x).ln();
                let quick = fast.ln_pdf(x);
                assert!((slow - quick).abs() < 1e-9 * (1.0 + slow.abs()), "{p:?} x={x}: {slow} vs {quick}");
            }
        }
    }

    #[test]
    fn cdf_is_monotone_and_consistent_with_pdf() {
        let p = NctParams::BILLIONAIRE;
        let xs: Vec<f64> = (-20..=40).map(|i| p.l + p.s * i as f64).collect();
        let cdfs: Vec<f64> = xs.iter().map(|&x| nct_cdf(&p, x)).collect();
        assert!(cdfs.windows(2).all(|w| w[0] <= w[1]));
        // CDF increments equal integrated density.
        let q = integrate(|x| nct_pdf(&p, x), xs[10], xs[30], 1e-12, 1e-10, 200);
        assert!((q.value - (cdfs[30] - cdfs[10])).abs() < 1e-8);
    }

    #[test]
    fn analytic_mean_formula() {
        let p = NctParams::new(4.0, 1.0, 0.0, 1.0).unwrap();
        assert!((p.mean().unwrap() - 1.253_314_137_315_500_3).abs() < 1e-12);
        assert!(NctParams::new(1.0, 1.0, 0.0, 1.0).unwrap().mean().is_none());
    }

    #[test]
    fn pareto_tail_at_cutoff() {
        let p = ParetoParams::new(5000.0, 2.0).unwrap();
        let mut r = stream(1);
        for _ in 0..10_000 {
            assert!(sample_pareto(&p, &mut r) >= 5000.0);
        }
        assert_eq!(p.survival(5000.0), 1.0);
        assert_eq!(p.survival(10_000.0), 0.25);
    }

    #[test]
    fn fit_rejects_short_and_degenerate_input() {
        assert!(matches!(fit_nct_mle(&[1.0; 10]), Err(DistError::InsufficientData { .. })));
        assert!(matches!(fit_nct_mle(&[0.3; 200]), Err(DistError::FitDidNotConverge { .. })));
    }
}
