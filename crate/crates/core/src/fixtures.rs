//! Deterministic synthetic data sets with known structure, used by the
//! command-line demos and by tests.
//!
//! The reference population has a lognormal body (median 150 000, log-sd
//! 1.2) joined at 10⁶ to a Pareto tail of exponent 2.13 that holds 10% of
//! households, with the exponent dropping to 1 above 10⁸.

use crate::empirics::{DecileRow, LorenzSurvey, RichList};
use crate::numeric::{self, NeumaierSum};
use crate::process::SavingsModel;
use crate::tailstats::{EmpiricalTail, TailPoint};

pub const BODY_MEDIAN: f64 = 1.5e5;
pub const BODY_LOG_SD: f64 = 1.2;
pub const TAIL_START: f64 = 1e6;
pub const TAIL_MASS: f64 = 0.1;
pub const TAIL_BETA: f64 = 2.13;
pub const TOP_START: f64 = 1e8;

/// Exceedance of the reference population at `w`.
pub fn two_regime_exceedance(w: f64) -> f64 {
    let mu = BODY_MEDIAN.ln();
    let fb = numeric::std_normal_cdf((TAIL_START.ln() - mu) / BODY_LOG_SD);
    if w <= 0.0 {
        1.0
    } else if w < TAIL_START {
        1.0 - (1.0 - TAIL_MASS) * numeric::std_normal_cdf((w.ln() - mu) / BODY_LOG_SD) / fb
    } else if w < TOP_START {
        TAIL_MASS * (TAIL_START / w).powf(TAIL_BETA)
    } else {
        TAIL_MASS * (TAIL_START / TOP_START).powf(TAIL_BETA) * (TOP_START / w)
    }
}

/// Reference population on a log grid from 10² to 10¹⁰; the last point has
/// exceedance 0 so that bootstrap draws stay bounded.
pub fn two_regime_tail(per_decade: usize) -> EmpiricalTail {
    let per_decade = per_decade.max(1);
    let n = 8 * per_decade;
    let points = (0..=n)
        .map(|i| {
            let wealth = 10f64.powf(2.0 + i as f64 / per_decade as f64);
            let exceedance = if i == n { 0.0 } else { two_regime_exceedance(wealth) };
            TailPoint { wealth, exceedance }
        })
        .collect();
    EmpiricalTail::new(points, None).expect("reference grid is monotone")
}

/// Wealth at which the reference exceedance equals `p`, by bisection in log space.
pub fn two_regime_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if two_regime_exceedance(mid.exp()) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Lorenz survey of the reference population in `buckets` equal household
/// groups, built from `resolution` mid-quantiles.
pub fn synthetic_survey(year: i32, households: f64, buckets: usize, resolution: usize) -> LorenzSurvey {
    let per = (resolution / buckets).max(1);
    let m = per * buckets;
    let w: Vec<f64> = (0..m).map(|j| two_regime_quantile(1.0 - (j as f64 + 0.5) / m as f64)).collect();
    let total = numeric::compensated_sum(w.iter().copied());
    let mut rows = vec![(0.0, 0.0)];
    let mut acc = NeumaierSum::new();
    for b in 0..buckets {
        for x in &w[b * per..(b + 1) * per] {
            acc.add(*x);
        }
        let share = if b + 1 == buckets { 1.0 } else { acc.value() / total };
        rows.push(((b + 1) as f64 / buckets as f64, share));
    }
    let total_wealth = total / m as f64 * households;
    LorenzSurvey::new(year, rows, households, total_wealth).expect("quantiles are sorted")
}

/// The `r` richest households of a reference population of `households`.
pub fn synthetic_rich_list(year: i32, households: f64, r: usize) -> RichList {
    let wealth = (0..r).map(|i| two_regime_quantile((i as f64 + 0.5) / households)).collect();
    RichList::new(year, wealth, households).expect("positive wealth")
}

/// Ten budget deciles whose excess income follows `savings` exactly.
pub fn synthetic_deciles(savings: &SavingsModel) -> Vec<DecileRow> {
    (0..10)
        .map(|d| {
            let median_wealth = two_regime_quantile(1.0 - (d as f64 + 0.5) / 10.0);
            let disposable_income = 15_000.0 + 0.02 * median_wealth;
            DecileRow { median_wealth, disposable_income, expenditure: disposable_income - savings.eval(median_wealth) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exceedance_is_continuous_at_the_joins() {
        let below = two_regime_exceedance(TAIL_START * (1.0 - 1e-12));
        assert!((below - TAIL_MASS).abs() < 1e-9);
        let a = two_regime_exceedance(TOP_START * (1.0 - 1e-12));
        let b = two_regime_exceedance(TOP_START);
        assert!((a / b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quantile_inverts_exceedance() {
        for p in [0.9, 0.5, 0.1, 1e-3, 1e-6] {
            assert!((two_regime_exceedance(two_regime_quantile(p)) / p - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn survey_and_rich_list_are_valid() {
        let s = synthetic_survey(2008, 2.6e7, 100, 100_000);
        assert_eq!(s.rows.len(), 101);
        let r = synthetic_rich_list(2008, 2.6e7, 500);
        assert!(r.wealth.iter().all(|&w| w > 1e7));
        let d = synthetic_deciles(&SavingsModel::DECILE_FIT);
        assert!(d.windows(2).all(|p| p[0].median_wealth < p[1].median_wealth));
    }
}
