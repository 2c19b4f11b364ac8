//! Calibration from survey and rich-list data: Lorenz-to-tail conversion,
//! percentile rates of return, return coefficients, the choice of γ, the
//! savings curve and the mean–variance relation of returns.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{self, golden_section, linear_regression, mean_std, nelder_mead, NelderMeadOptions};
use crate::process::SavingsModel;
use crate::tailstats::{EmpiricalTail, TailError, TailPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmpiricsError {
    #[error("invalid survey: {0}")]
    InvalidSurvey(String),
    #[error("invalid rich list: {0}")]
    InvalidRichList(String),
    #[error("bucket {index} has average wealth {wealth} below the previous bucket's {previous}; rows are not ordered by wealth")]
    NonMonotoneWealth { index: usize, wealth: f64, previous: f64 },
    #[error("bucket {index} contains no households")]
    ZeroBucket { index: usize },
    #[error("rich-list wealth {rich_min} does not exceed the survey maximum {tail_max}")]
    Overlap { rich_min: f64, tail_max: f64 },
    #[error("no percentile can be extracted from both tails")]
    MissingPercentile,
    #[error("need at least {needed} points, got {found}")]
    InsufficientPoints { needed: usize, found: usize },
    #[error("no point has a positive rate of return")]
    AllNonPositive,
    #[error("need at least 2 bins with 10 or more points, got {found}")]
    InsufficientBins { found: usize },
    #[error("savings fit did not converge: {0}")]
    FitDidNotConverge(String),
    #[error("value {value} at index {index} must be finite and positive")]
    NonPositive { index: usize, value: f64 },
    #[error(transparent)]
    Tail(#[from] TailError),
}

/// Cumulative household and wealth shares of a wealth survey, households
/// ordered by wealth, with the totals they are shares of.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorenzSurvey {
    pub year: i32,
    /// `(cumulative household share, cumulative wealth share)`.
    pub rows: Vec<(f64, f64)>,
    pub households: f64,
    pub total_wealth: f64,
}

impl LorenzSurvey {
    pub fn new(year: i32, rows: Vec<(f64, f64)>, households: f64, total_wealth: f64) -> Result<Self, EmpiricsError> {
        let s = LorenzSurvey { year, rows, households, total_wealth };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), EmpiricsError> {
        let bad = |m: String| Err(EmpiricsError::InvalidSurvey(m));
        if !(self.households > 0.0 && self.households.is_finite()) {
            return bad(format!("household total must be positive, got {}", self.households));
        }
        if !(self.total_wealth > 0.0 && self.total_wealth.is_finite()) {
            return bad(format!("wealth total must be positive, got {}", self.total_wealth));
        }
        if self.rows.len() < 2 {
            return bad("need at least the (0,0) and (1,1) rows".into());
        }
        if self.rows[0] != (0.0, 0.0) {
            return bad(format!("first row must be (0, 0), got {:?}", self.rows[0]));
        }
        if *self.rows.last().unwrap() != (1.0, 1.0) {
            return bad(format!("last row must be (1, 1), got {:?}", self.rows.last().unwrap()));
        }
        for (i, w) in self.rows.windows(2).enumerate() {
            if !(w[1].0 >= w[0].0 && w[1].1 >= w[0].1) || !(w[1].0 <= 1.0 && w[1].1 <= 1.0) {
                return bad(format!("rows {} and {} are not non-decreasing within [0, 1]", i, i + 1));
            }
        }
        Ok(())
    }
}

/// Bucket averages `w_i = ŵ_i/ĥ_i` with exceedance `1 − h̃_{i+1}`, for buckets
/// with positive wealth. Buckets with equal averages collapse into one point
/// carrying the lower exceedance.
pub fn lorenz_to_tail(survey: &LorenzSurvey) -> Result<EmpiricalTail, EmpiricsError> {
    survey.validate()?;
    let h = survey.households;
    let w = survey.total_wealth;
    let mut points: Vec<TailPoint> = Vec::new();
    let mut previous = 0.0;
    for (i, pair) in survey.rows.windows(2).enumerate() {
        let hh = pair[1].0 * h - pair[0].0 * h;
        if hh <= 0.0 {
            return Err(EmpiricsError::ZeroBucket { index: i });
        }
        let ww = pair[1].1 * w - pair[0].1 * w;
        let avg = ww / hh;
        if avg < previous {
            return Err(EmpiricsError::NonMonotoneWealth { index: i, wealth: avg, previous });
        }
        previous = avg;
        if avg <= 0.0 {
            continue;
        }
        let exceedance = 1.0 - pair[1].0;
        match points.last_mut() {
            Some(last) if last.wealth == avg => last.exceedance = exceedance,
            _ => points.push(TailPoint { wealth: avg, exceedance }),
        }
    }
    Ok(EmpiricalTail::new(points, Some(h))?)
}

/// Inverse of [`lorenz_to_tail`] for surveys without zero-wealth buckets:
/// household shares from exceedance gaps, wealth shares from bucket averages.
pub fn tail_to_lorenz(tail: &EmpiricalTail, households: f64, total_wealth: f64) -> Vec<(f64, f64)> {
    let mut rows = vec![(0.0, 0.0)];
    let mut prev_exceedance = 1.0;
    let mut wealth_acc = numeric::NeumaierSum::new();
    for p in tail.points() {
        let hh = (prev_exceedance - p.exceedance) * households;
        wealth_acc.add(p.wealth * hh);
        rows.push((1.0 - p.exceedance, wealth_acc.value() / total_wealth));
        prev_exceedance = p.exceedance;
    }
    rows
}

/// The richest `R` households of a population of `households`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RichList {
    pub year: i32,
    pub wealth: Vec<f64>,
    pub households: f64,
}

impl RichList {
    pub fn new(year: i32, wealth: Vec<f64>, households: f64) -> Result<Self, EmpiricsError> {
        if wealth.is_empty() {
            return Err(EmpiricsError::InvalidRichList("no entries".into()));
        }
        if let Some((index, &value)) = wealth.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(EmpiricsError::NonPositive { index, value });
        }
        if !(households >= wealth.len() as f64 && households.is_finite()) {
            return Err(EmpiricsError::InvalidRichList(format!(
                "population of {households} households cannot contain {} entries",
                wealth.len()
            )));
        }
        Ok(RichList { year, wealth, households })
    }
}

/// Appends `(w_i, (R−i)/H)` for the ascending rich-list wealth. Survey points
/// keep their exceedance unless it is below `R/H`: every listed household
/// exceeds them, so they are lifted to that floor.
pub fn merge_rich_list(tail: &EmpiricalTail, rich: &RichList) -> Result<EmpiricalTail, EmpiricsError> {
    let mut sorted = rich.wealth.clone();
    sorted.sort_by(f64::total_cmp);
    let tail_max = tail.points().last().map_or(0.0, |p| p.wealth);
    if sorted[0] <= tail_max {
        return Err(EmpiricsError::Overlap { rich_min: sorted[0], tail_max });
    }
    let r = sorted.len();
    let h = rich.households;
    let floor = r as f64 / h;
    let mut points: Vec<TailPoint> = tail
        .points()
        .iter()
        .map(|p| TailPoint { wealth: p.wealth, exceedance: p.exceedance.max(floor) })
        .collect();
    for (i, &w) in sorted.iter().enumerate() {
        let exceedance = (r - (i + 1)) as f64 / h;
        match points.last_mut() {
            Some(last) if last.wealth == w => last.exceedance = exceedance,
            _ => points.push(TailPoint { wealth: w, exceedance }),
        }
    }
    Ok(EmpiricalTail::new(points, Some(h))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RorRecord {
    pub percentile: u32,
    pub wealth: f64,
    pub ror: f64,
    pub savings: f64,
}

/// Per-year rates of return of percentile wealth over one observation period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RorSeries {
    pub period_years: f64,
    pub records: Vec<RorRecord>,
}

impl RorSeries {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.wealth, r.ror)).collect()
    }
}

fn extractable(tail: &EmpiricalTail, p: f64) -> Option<f64> {
    let first = tail.points().first()?;
    if p > first.exceedance {
        return None;
    }
    tail.percentile(p).ok()
}

/// `r = (w' − w − period·S(w)) / (period·w)` for integer percentiles 1..=100,
/// where percentile `i` has exceedance `1 − i/100`. Percentiles that fall
/// below the first point of either tail (non-positive wealth) are skipped.
pub fn percentile_ror(
    tail_t: &EmpiricalTail,
    tail_t2: &EmpiricalTail,
    savings: &SavingsModel,
    period_years: f64,
) -> Result<RorSeries, EmpiricsError> {
    let mut records = Vec::new();
    for i in 1..=100u32 {
        let p = 1.0 - f64::from(i) / 100.0;
        if let (Some(w), Some(w2)) = (extractable(tail_t, p), extractable(tail_t2, p)) {
            let s = savings.eval(w);
            records.push(RorRecord { percentile: i, wealth: w, ror: ror(w, w2, s, period_years), savings: s });
        }
    }
    if records.is_empty() {
        return Err(EmpiricsError::MissingPercentile);
    }
    Ok(RorSeries { period_years, records })
}

/// Per-year return net of savings.
pub fn ror(w: f64, w_next: f64, savings: f64, period_years: f64) -> f64 {
    (w_next - w - period_years * savings) / (period_years * w)
}

/// `α = (W' − W − S)/W^γ` for each `(W, W', S)`.
pub fn extract_alpha(triples: &[(f64, f64, f64)], gamma: f64) -> Result<Vec<f64>, EmpiricsError> {
    triples
        .iter()
        .enumerate()
        .map(|(i, &(w, w2, s))| {
            if !(w.is_finite() && w > 0.0) {
                return Err(EmpiricsError::NonPositive { index: i, value: w });
            }
            Ok((w2 - w - s) / w.powf(gamma))
        })
        .collect()
}

/// `α = r / w^(γ−1)` for `(wealth, ror)` points.
pub fn alpha_from_ror(points: &[(f64, f64)], gamma: f64) -> Vec<f64> {
    points.iter().map(|&(w, r)| r * w.powf(1.0 - gamma)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSelection {
    pub gamma: f64,
    /// `|mean α_A − mean α_B|` at the selected γ.
    pub objective: f64,
    /// The mean difference keeps one sign over the whole interval.
    pub no_crossing: bool,
}

/// The γ in `[lo, hi]` at which the mean return coefficients of two
/// `(wealth, ror)` datasets agree.
pub fn select_gamma(a: &[(f64, f64)], b: &[(f64, f64)], lo: f64, hi: f64) -> Result<GammaSelection, EmpiricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(EmpiricsError::InsufficientPoints { needed: 1, found: 0 });
    }
    let diff = |g: f64| {
        let ma = numeric::compensated_sum(alpha_from_ror(a, g)) / a.len() as f64;
        let mb = numeric::compensated_sum(alpha_from_ror(b, g)) / b.len() as f64;
        ma - mb
    };
    const GRID: usize = 200;
    let grid: Vec<(f64, f64)> = (0..=GRID)
        .map(|i| {
            let g = lo + (hi - lo) * i as f64 / GRID as f64;
            (g, diff(g))
        })
        .collect();
    if grid.iter().all(|&(_, d)| d == 0.0) {
        return Ok(GammaSelection { gamma: 0.5 * (lo + hi), objective: 0.0, no_crossing: false });
    }
    let crossing = grid.windows(2).find(|w| w[0].1 == 0.0 || w[0].1.signum() != w[1].1.signum());
    match crossing {
        Some(w) => {
            let (g, obj) = golden_section(|g| diff(g).abs(), w[0].0, w[1].0, 1e-12);
            Ok(GammaSelection { gamma: g, objective: obj, no_crossing: false })
        }
        None => {
            let best = grid.iter().min_by(|x, y| x.1.abs().total_cmp(&y.1.abs())).unwrap();
            let i = grid.iter().position(|p| p.0 == best.0).unwrap();
            let a = grid[i.saturating_sub(1)].0;
            let b = grid[(i + 1).min(GRID)].0;
            let (g, obj) = golden_section(|g| diff(g).abs(), a, b, 1e-12);
            Ok(GammaSelection { gamma: g, objective: obj, no_crossing: true })
        }
    }
}

/// `r ≈ μ·w^(γ−1)` fitted on the log scale, with the spread of `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFitROR {
    pub mu: f64,
    pub gamma: f64,
    /// Standard deviation of the pooled `α = r/w^(γ−1)`.
    pub sigma: f64,
    pub gamma_fixed: bool,
    pub n_used: usize,
    /// Points with `r ≤ 0`, left out of the log fit.
    pub n_excluded: usize,
}

impl PowerFitROR {
    /// One standard deviation around the mean return at wealth `w`.
    pub fn band(&self, w: f64) -> (f64, f64) {
        crate::theory::ror_band(self.mu, self.sigma, self.gamma, w)
    }
}

/// Least squares of `ln r` on `ln w` over points with positive `r`. With
/// `fixed_gamma` only the prefactor is estimated.
pub fn fit_ror_power(points: &[(f64, f64)], fixed_gamma: Option<f64>) -> Result<PowerFitROR, EmpiricsError> {
    if points.len() < 3 {
        return Err(EmpiricsError::InsufficientPoints { needed: 3, found: points.len() });
    }
    if let Some((index, &(value, _))) = points.iter().enumerate().find(|(_, p)| !(p.0.is_finite() && p.0 > 0.0)) {
        return Err(EmpiricsError::NonPositive { index, value });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().filter(|p| p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).unzip();
    if x.is_empty() {
        return Err(EmpiricsError::AllNonPositive);
    }
    let n_used = x.len();
    let (mu, gamma) = match fixed_gamma {
        Some(g) => {
            let resid: Vec<f64> = x.iter().zip(&y).map(|(lx, ly)| ly - (g - 1.0) * lx).collect();
            ((numeric::compensated_sum(resid.iter().copied()) / n_used as f64).exp(), g)
        }
        None => {
            if n_used < 3 {
                return Err(EmpiricsError::InsufficientPoints { needed: 3, found: n_used });
            }
            let (intercept, slope, _) = linear_regression(&x, &y);
            (intercept.exp(), 1.0 + slope)
        }
    };
    let (_, sigma) = mean_std(&alpha_from_ror(points, gamma));
    Ok(PowerFitROR { mu, gamma, sigma, gamma_fixed: fixed_gamma.is_some(), n_used, n_excluded: points.len() - n_used })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinRatio {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanVarianceCheck {
    pub bins: Vec<BinRatio>,
    /// Count-weighted mean of the per-bin ratios.
    pub pooled: f64,
}

/// `var(r)/mean(r)²` within each bin of returns. Bins with fewer than ten
/// points are ignored.
pub fn mean_variance_check(bins: &[Vec<f64>]) -> Result<MeanVarianceCheck, EmpiricsError> {
    let stats: Vec<BinRatio> = bins
        .iter()
        .filter(|b| b.len() >= 10)
        .map(|b| {
            let (mean, sd) = mean_std(b);
            let variance = sd * sd;
            BinRatio { n: b.len(), mean, variance, ratio: variance / (mean * mean) }
        })
        .collect();
    if stats.len() < 2 {
        return Err(EmpiricsError::InsufficientBins { found: stats.len() });
    }
    let total: usize = stats.iter().map(|s| s.n).sum();
    let pooled = numeric::compensated_sum(stats.iter().map(|s| s.ratio * s.n as f64)) / total as f64;
    Ok(MeanVarianceCheck { bins: stats, pooled })
}

/// Groups `(wealth, ror)` points into bins `[edges[j], edges[j+1])`.
pub fn bin_by_wealth(points: &[(f64, f64)], edges: &[f64]) -> Vec<Vec<f64>> {
    let mut bins = vec![Vec::new(); edges.len().saturating_sub(1)];
    for &(w, r) in points {
        let j = edges.partition_point(|&e| e <= w);
        if j >= 1 && j < edges.len() {
            bins[j - 1].push(r);
        }
    }
    bins
}

/// One household-budget decile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecileRow {
    pub median_wealth: f64,
    pub disposable_income: f64,
    pub expenditure: f64,
}

impl DecileRow {
    pub fn excess_income(&self) -> f64 {
        self.disposable_income - self.expenditure
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavingsFit {
    pub model: SavingsModel,
    pub residual_sum_squares: f64,
    pub iterations: usize,
}

fn savings_from_theta(t: &[f64]) -> (f64, f64) {
    (t[0].exp(), -t[1].exp())
}

/// Least squares for `κ₂, κ₃` in `κ₁/(1 + κ₂ w^κ₃)` with `κ₁` fixed, over
/// `(wealth, savings)` pairs.
pub fn fit_savings(pairs: &[(f64, f64)], kappa1: f64) -> Result<SavingsFit, EmpiricsError> {
    if pairs.len() < 2 {
        return Err(EmpiricsError::InsufficientPoints { needed: 2, found: pairs.len() });
    }
    if let Some((index, &(value, _))) = pairs.iter().enumerate().find(|(_, p)| !(p.0.is_finite() && p.0 > 0.0)) {
        return Err(EmpiricsError::NonPositive { index, value });
    }
    if !(kappa1 > 0.0 && kappa1.is_finite()) {
        return Err(EmpiricsError::NonPositive { index: 0, value: kappa1 });
    }
    // Linearised start: ln(κ₁/y − 1) = ln κ₂ + κ₃ ln w wherever 0 < y < κ₁.
    let (lx, ly): (Vec<f64>, Vec<f64>) = pairs
        .iter()
        .filter(|p| p.1 > 0.0 && p.1 < kappa1)
        .map(|p| (p.0.ln(), (kappa1 / p.1 - 1.0).ln()))
        .unzip();
    let mut starts = Vec::new();
    let distinct = lx.windows(2).any(|w| w[0] != w[1]);
    if lx.len() >= 2 && distinct {
        let (a, b, _) = linear_regression(&lx, &ly);
        if a.is_finite() && b < 0.0 {
            starts.push(vec![a, (-b).ln()]);
        }
    }
    for (lk2, k3) in [(20.0, -1.0), (10.0, -0.5), (30.0, -2.0), (5.0, -0.25)] {
        starts.push(vec![lk2, f64::ln(-k3)]);
    }
    let scale = numeric::compensated_sum(pairs.iter().map(|p| p.1 * p.1)).max(1e-300);
    let rss = |t: &[f64]| {
        let (k2, k3) = savings_from_theta(t);
        let model = SavingsModel::Logistic { kappa1, kappa2: k2, kappa3: k3 };
        numeric::compensated_sum(pairs.iter().map(|&(w, y)| {
            let d = y - model.eval(w);
            d * d
        })) / scale
    };
    let opts = NelderMeadOptions { ftol: 1e-16, xtol: 1e-10, max_iter: 20_000 };
    let mut best: Option<numeric::Minimum> = None;
    for s in &starts {
        let m = nelder_mead(rss, s, &[0.5, 0.1], opts);
        if best.as_ref().is_none_or(|b| m.f < b.f) {
            best = Some(m);
        }
    }
    let best = best.expect("at least one start");
    let polished = nelder_mead(rss, &best.x, &[0.05, 0.01], opts);
    let (kappa2, kappa3) = savings_from_theta(&polished.x);
    if !polished.converged {
        return Err(EmpiricsError::FitDidNotConverge(format!("stopped at kappa2 = {kappa2}, kappa3 = {kappa3}")));
    }
    if kappa3 > -1e-6 || !kappa2.is_finite() || kappa2 <= 0.0 {
        return Err(EmpiricsError::FitDidNotConverge(format!(
            "kappa3 = {kappa3} reached the constant-savings boundary"
        )));
    }
    Ok(SavingsFit {
        model: SavingsModel::Logistic { kappa1, kappa2, kappa3 },
        residual_sum_squares: polished.f * scale,
        iterations: polished.iterations,
    })
}
