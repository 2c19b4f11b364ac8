//! Gini coefficient, top shares and Lorenz curves.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::NeumaierSum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InequalityError {
    #[error("wealth vector is empty")]
    EmptyInput,
    #[error("wealth at index {index} is {value}; entries must be finite and positive")]
    NonPositive { index: usize, value: f64 },
    #[error("share fraction {0} outside (0, 1)")]
    InvalidFraction(f64),
}

fn sorted_positive(wealth: &[f64]) -> Result<Vec<f64>, InequalityError> {
    if wealth.is_empty() {
        return Err(InequalityError::EmptyInput);
    }
    if let Some((index, &value)) = wealth.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
        return Err(InequalityError::NonPositive { index, value });
    }
    let mut v = wealth.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn gini_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut total = NeumaierSum::new();
    let mut weighted = NeumaierSum::new();
    for (i, &w) in sorted.iter().enumerate() {
        total.add(w);
        weighted.add((i + 1) as f64 * w);
    }
    let g = 2.0 / n * weighted.value() / total.value() - (n + 1.0) / n;
    g.max(0.0)
}

/// Number of ranks strictly above `(1-q)·N` (1-based).
fn top_count(n: usize, q: f64) -> usize {
    let threshold = (1.0 - q) * n as f64;
    (1..=n).filter(|&i| i as f64 > threshold).count()
}

fn top_share_sorted(sorted: &[f64], q: f64) -> f64 {
    let m = top_count(sorted.len(), q);
    let mut total = NeumaierSum::new();
    let mut top = NeumaierSum::new();
    for (i, &w) in sorted.iter().enumerate() {
        total.add(w);
        if i >= sorted.len() - m {
            top.add(w);
        }
    }
    top.value() / total.value()
}

/// `(2/N) Σ i·w_i / W − (N+1)/N` over the ascending-sorted sample.
pub fn gini(wealth: &[f64]) -> Result<f64, InequalityError> {
    Ok(gini_sorted(&sorted_positive(wealth)?))
}

/// Fraction of total wealth held by sorted ranks `i > (1−q)N`.
pub fn top_share(wealth: &[f64], q: f64) -> Result<f64, InequalityError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(InequalityError::InvalidFraction(q));
    }
    Ok(top_share_sorted(&sorted_positive(wealth)?, q))
}

/// Lorenz curve as `(cumulative household share, cumulative wealth share)`,
/// starting at `(0, 0)` and ending at `(1, 1)`.
pub fn lorenz_points(wealth: &[f64]) -> Result<Vec<(f64, f64)>, InequalityError> {
    let sorted = sorted_positive(wealth)?;
    let n = sorted.len();
    let total = crate::numeric::compensated_sum(sorted.iter().copied());
    let mut acc = NeumaierSum::new();
    let mut out = Vec::with_capacity(n + 1);
    out.push((0.0, 0.0));
    for (i, &w) in sorted.iter().enumerate() {
        acc.add(w);
        let share = if i + 1 == n { 1.0 } else { (acc.value() / total).min(1.0) };
        out.push(((i + 1) as f64 / n as f64, share));
    }
    Ok(out)
}

/// Share of total wealth held by the single richest agent.
pub fn richest_share(wealth: &[f64]) -> Result<f64, InequalityError> {
    let sorted = sorted_positive(wealth)?;
    Ok(sorted[sorted.len() - 1] / crate::numeric::compensated_sum(sorted.iter().copied()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub gini: f64,
    pub top_share: f64,
    pub q: f64,
    pub n_agents: usize,
    pub total_wealth: f64,
}

impl InequalityReport {
    /// One sort for all measures.
    pub fn compute(wealth: &[f64], q: f64) -> Result<Self, InequalityError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(InequalityError::InvalidFraction(q));
        }
        let sorted = sorted_positive(wealth)?;
        Ok(InequalityReport {
            gini: gini_sorted(&sorted),
            top_share: top_share_sorted(&sorted, q),
            q,
            n_agents: sorted.len(),
            total_wealth: crate::numeric::compensated_sum(sorted.iter().copied()),
        })
    }
}
