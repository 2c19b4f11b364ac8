//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use kesten_core::distributions::sample_nct;
use kesten_core::empirics::{fit_ror_power, fit_savings, lorenz_to_tail, mean_variance_check, percentile_ror, LorenzSurvey};
use kesten_core::fixtures::{synthetic_deciles, two_regime_tail};
use kesten_core::formats;
use kesten_core::numeric::spearman;
use kesten_core::process::{apply_replacement, step};
use kesten_core::tailstats::fit_power_law_default;
use kesten_core::theory::{stationary_tail_exponent, Law};
use kesten_core::*;

const N: usize = 100_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn kesten(dir: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_kesten")).current_dir(dir).args(args).env_remove("KESTEN_THREADS").output().unwrap();
    assert!(out.status.success(), "kesten {args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn beta_of(wealth: &[f64]) -> f64 {
    fit_power_law_default(&empirical_tail(wealth).unwrap()).unwrap().beta
}

fn same_outputs(a: &Path, b: &Path) -> bool {
    let mut names: Vec<_> = fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_str().is_some_and(|s| s.ends_with(".csv") || s.ends_with(".txt")))
        .collect();
    names.sort();
    !names.is_empty() && names.iter().all(|n| fs::read(a.join(n)).unwrap() == fs::read(b.join(n)).unwrap())
}

/// γ=1 lognormal limit, run through the binary on one thread.
fn lognormal_limit(dir: &Path) -> Outcome {
    let t = Instant::now();
    kesten(dir, &["simulate", "--gamma", "1", "--init", "i1", "--n", "100000", "--horizon", "400", "--observe", "0,400", "--seed", "401", "--threads", "1", "--out", "c1_t1"]);
    let secs = t.elapsed().as_secs_f64();
    let (wealth, _) = formats::read_checkpoint(&dir.join("c1_t1"), "final").unwrap();
    let fit = fit_lognormal(&wealth).unwrap();
    outcome(fit.ks_distance < 0.05 && secs < 300.0, format!("ks_distance {:.4} (< 0.05), runtime {secs:.1} s (< 300 s)", fit.ks_distance))
}

fn final_gini(gamma: f64, ic: usize, horizon: usize, seed: u64) -> f64 {
    let mut c = SimulationConfig::generic(gamma, InitialCondition::generic(ic).unwrap(), N, horizon, seed);
    c.observation_times = vec![horizon];
    run(&c, |_| {}).unwrap()[0].gini
}

fn initial_condition_independence() -> Outcome {
    let g: Vec<f64> = (1..=4).map(|ic| final_gini(1.0, ic, 400, 402)).collect();
    let gap = g.iter().cloned().fold(f64::MIN, f64::max) - g.iter().cloned().fold(f64::MAX, f64::min);
    outcome(gap < 0.03, format!("Gini at n=400 for I.1-I.4 {:.4?}, max pairwise gap {gap:.4} (< 0.03)", g))
}

struct NonlinearRun {
    w0: Vec<f64>,
    w_final: Vec<f64>,
    betas: [f64; 3],
    /// Smallest pre-step wealth of any agent whose one-step gain exceeded 1.
    min_wealth_gain_above_one: Option<f64>,
}

/// γ=1.075 generic run, stepped by hand so that single-step gains are visible.
fn nonlinear_run(ic: usize, seed: u64) -> NonlinearRun {
    let config = SimulationConfig::generic(1.075, InitialCondition::generic(ic).unwrap(), N, 300, seed);
    let sampler = config.alpha.sampler().unwrap();
    let mut pop = sample_initial(&config).unwrap();
    let w0 = pop.wealth.clone();
    let mut betas = [0.0; 3];
    let mut min_w: Option<f64> = None;
    for n in 1..=300 {
        step(&mut pop, &config, &sampler).unwrap();
        for i in 0..pop.len() {
            let (prev, next) = (pop.prev_wealth[i], pop.wealth[i]);
            if !pop.flagged[i] && (next - prev) / prev > 1.0 {
                min_w = Some(min_w.map_or(prev, |m: f64| m.min(prev)));
            }
        }
        apply_replacement(&mut pop, config.replacement, config.master_seed).unwrap();
        match n {
            10 => betas[0] = beta_of(&pop.wealth),
            100 => betas[1] = beta_of(&pop.wealth),
            300 => betas[2] = beta_of(&pop.wealth),
            _ => {}
        }
    }
    NonlinearRun { w0, w_final: pop.wealth, betas, min_wealth_gain_above_one: min_w }
}

fn initial_condition_dependence(runs: &[NonlinearRun]) -> Outcome {
    let i3 = &runs[2];
    let rho_nonlinear = spearman(&i3.w0, &i3.w_final);
    let mut c = SimulationConfig::generic(1.0, InitialCondition::generic(3).unwrap(), N, 300, 403);
    c.observation_times = vec![];
    let mut w0 = Vec::new();
    let mut wn = Vec::new();
    run(&c, |p| match p.step {
        0 => w0 = p.wealth.clone(),
        300 => wn = p.wealth.clone(),
        _ => {}
    })
    .unwrap();
    let growth: Vec<f64> = wn.iter().zip(&w0).map(|(a, b)| a / b).collect();
    let rho_linear = spearman(&w0, &growth);
    outcome(
        rho_nonlinear > 0.5 && rho_linear.abs() < 0.1,
        format!("I.3 rank correlation W0 vs W300 at gamma=1.075: {rho_nonlinear:.4} (> 0.5); W0 vs W300/W0 at gamma=1: {rho_linear:.4} (|.| < 0.1)"),
    )
}

fn emerging_tails(runs: &[NonlinearRun]) -> Outcome {
    let ok = runs.iter().all(|r| r.betas[2] < r.betas[1] && r.betas[1] < r.betas[0]);
    let shown: Vec<String> = runs.iter().enumerate().map(|(i, r)| format!("I.{} {:.3?}", i + 1, r.betas)).collect();
    outcome(ok, format!("beta at n=10/100/300: {}", shown.join("; ")))
}

fn crossover(runs: &[NonlinearRun]) -> Outcome {
    let scale = crossover_scale(0.1, 1.075).unwrap();
    let in_range = (1e13..=1e14).contains(&scale);
    let lowest = runs.iter().filter_map(|r| r.min_wealth_gain_above_one).fold(f64::INFINITY, f64::min);
    let late = lowest > 1e12;
    let seen = if lowest.is_finite() { format!("{lowest:.3e}") } else { "none".into() };
    outcome(
        in_range && late,
        format!("crossover_scale(0.1, 1.075) = {scale:.4e} (in [1e13, 1e14]); lowest wealth with one-step gain > 1: {seen} (must exceed 1e12)"),
    )
}

fn realistic_config(replacement: Replacement, seed: u64) -> SimulationConfig {
    SimulationConfig::realistic(InitialCondition::Bootstrap { tail: two_regime_tail(5000) }, replacement, N, 50, seed)
}

fn tail_drift() -> Outcome {
    let c = realistic_config(Replacement::R1, 2008);
    let mut b0 = 0.0;
    let mut b50 = 0.0;
    run(&c, |p| match p.step {
        0 => b0 = beta_of(&p.wealth),
        50 => b50 = beta_of(&p.wealth),
        _ => {}
    })
    .unwrap();
    outcome((1.2..=1.7).contains(&b50), format!("beta at n=0 {b0:.3}, at n=50 {b50:.3} (in [1.2, 1.7])"))
}

fn replacement_robustness() -> Outcome {
    let series: Vec<Vec<f64>> = [Replacement::R1, Replacement::R2, Replacement::R3]
        .iter()
        .map(|&r| {
            let mut g = Vec::new();
            run(&realistic_config(r, 2009), |p| g.push(inequality::gini(&p.wealth).unwrap())).unwrap();
            g
        })
        .collect();
    let mut worst: f64 = 0.0;
    for n in 0..=50 {
        for a in 0..3 {
            for b in a + 1..3 {
                worst = worst.max((series[a][n] - series[b][n]).abs());
            }
        }
    }
    outcome(worst < 0.05, format!("max Gini difference across R.1/R.2/R.3 over n<=50: {worst:.5} (< 0.05); final {:.4?}", [series[0][50], series[1][50], series[2][50]]))
}

fn parameter_recovery() -> Outcome {
    let p = NctParams::BILLIONAIRE;
    let mut rng = RngStream::for_agent(408, 0, 0, Lane::AUXILIARY);
    let xs: Vec<f64> = (0..1_000_000).map(|_| sample_nct(&p, &mut rng)).collect();
    let fit = fit_nct_mle(&xs).unwrap().params;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let nct_err = [rel(fit.k, p.k), rel(fit.c, p.c), rel(fit.l, p.l), rel(fit.s, p.s)].into_iter().fold(0.0, f64::max);

    let savings = SavingsModel::DECILE_FIT;
    let (mu, gamma, period) = (0.013, 1.075, 2.0);
    let ws: Vec<f64> = (0..=100).map(|i| 1e4 * 10f64.powf(i as f64 * 0.05)).collect();
    let tail = |f: &dyn Fn(f64) -> f64| {
        EmpiricalTail::new(ws.iter().enumerate().map(|(i, &w)| TailPoint { wealth: f(w), exceedance: 1.0 - i as f64 / 100.0 }).collect(), None).unwrap()
    };
    let t1 = tail(&|w| w);
    let t2 = tail(&|w| w + period * (savings.eval(w) + mu * w.powf(gamma)));
    let ror = fit_ror_power(&percentile_ror(&t1, &t2, &savings, period).unwrap().points(), None).unwrap();
    let ror_err = (ror.mu - mu).abs().max((ror.gamma - gamma).abs());

    let pairs: Vec<(f64, f64)> = synthetic_deciles(&savings).iter().map(|r| (r.median_wealth, r.excess_income())).collect();
    let sf = fit_savings(&pairs, 1e6).unwrap().model;
    let SavingsModel::Logistic { kappa2, kappa3, .. } = sf else { unreachable!() };
    let sav_err = rel(kappa2, 4.13e9).max(rel(kappa3, -1.308));

    outcome(
        nct_err < 0.1 && ror_err < 1e-10 && sav_err < 0.01,
        format!(
            "nct max rel err {nct_err:.4} (< 0.1) fit ({:.4}, {:.4}, {:.6}, {:.6}); ROR abs err {ror_err:.2e} (< 1e-10); savings max rel err {sav_err:.2e} (< 0.01)",
            fit.k, fit.c, fit.l, fit.s
        ),
    )
}

fn pairwise_gini(w: &[f64]) -> f64 {
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    let mut s = 0.0;
    for a in w {
        for b in w {
            s += (a - b).abs();
        }
    }
    s / (2.0 * n * n * mean)
}

fn two_point_bisection() -> f64 {
    let f = |b: f64| 0.5 * (2f64.powf(b) + 0.25f64.powf(b)) - 1.0;
    let (mut lo, mut hi) = (0.1, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn oracle_equivalences() -> Outcome {
    let mut rng = RngStream::for_agent(409, 0, 0, Lane::AUXILIARY);
    let mut gini_err: f64 = 0.0;
    for _ in 0..200 {
        let n = 2 + rng.index(299);
        let w: Vec<f64> = (0..n).map(|_| (rng.uniform() * 20.0 - 5.0).exp()).collect();
        gini_err = gini_err.max((inequality::gini(&w).unwrap() - pairwise_gini(&w)).abs());
    }
    let survey = LorenzSurvey::new(2008, vec![(0.0, 0.0), (0.25, 0.05), (0.5, 0.15), (0.75, 0.35), (1.0, 1.0)], 4.0, 100.0).unwrap();
    let tail: Vec<(f64, f64)> = lorenz_to_tail(&survey).unwrap().points().iter().map(|p| (p.wealth, p.exceedance)).collect();
    let hand_ok = tail == vec![(5.0, 0.75), (10.0, 0.5), (20.0, 0.25), (65.0, 0.0)];
    let oracle = two_point_bisection();
    let beta = stationary_tail_exponent(&Law::TwoPoint { a: 2.0, b: 0.25, p: 0.5 }, 5.0, 1_000_000, 409).unwrap().beta;
    outcome(
        gini_err < 1e-12 && hand_ok && (beta - 0.695).abs() < 0.01 && (beta - oracle).abs() < 0.01,
        format!("gini max err {gini_err:.2e} (< 1e-12); hand tail exact: {hand_ok}; two-point beta {beta:.4} vs bisection {oracle:.4} (0.695 +- 0.01)"),
    )
}

fn mean_variance() -> Outcome {
    let p = NctParams::BILLIONAIRE;
    let m = 1_000_000;
    // One α sample shared by every bin; wealth drawn log-uniformly inside each half-decade.
    let mut rng = RngStream::for_agent(410, 0, 0, Lane::AUXILIARY);
    let alpha: Vec<f64> = (0..m).map(|_| sample_nct(&p, &mut rng)).collect();
    let (ma, sa) = numeric::mean_std(&alpha);
    let target = sa * sa / (ma * ma);
    let bins: Vec<Vec<f64>> = (0..10)
        .map(|b| {
            let mut wr = RngStream::for_agent(410, b + 1, 0, Lane::AUXILIARY);
            alpha.iter().map(|a| a * 10f64.powf(4.0 + 0.5 * (b as f64 + wr.uniform())).powf(0.075)).collect()
        })
        .collect();
    let check = mean_variance_check(&bins).unwrap();
    let worst = check.bins.iter().map(|b| (b.ratio / target - 1.0).abs()).fold(0.0, f64::max);
    outcome(worst < 0.2, format!("var(alpha)/mean(alpha)^2 = {target:.3}; worst per-bin relative deviation over 10 half-decade bins 1e4-1e9: {worst:.4} (< 0.2)"))
}

fn determinism(dir: &Path) -> Outcome {
    kesten(dir, &["simulate", "--gamma", "1", "--init", "i1", "--n", "100000", "--horizon", "400", "--observe", "0,400", "--seed", "401", "--threads", "8", "--out", "c1_t8"]);
    let mut ok = same_outputs(&dir.join("c1_t1"), &dir.join("c1_t8"));
    for ic in 1..=4 {
        for threads in ["1", "8"] {
            let init = format!("i{ic}");
            let out = format!("c4_i{ic}_t{threads}");
            kesten(dir, &["simulate", "--gamma", "1.075", "--init", &init, "--n", "100000", "--horizon", "300", "--seed", "404", "--threads", threads, "--out", &out]);
        }
        ok &= same_outputs(&dir.join(format!("c4_i{ic}_t1")), &dir.join(format!("c4_i{ic}_t8")));
    }
    outcome(ok, "criterion 1 and 4 runs at 1 and 8 threads: all CSV and checkpoint files byte-identical".to_string() + if ok { "" } else { " (MISMATCH)" })
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut report = |n: usize, o: Outcome| {
        println!("criterion {n:>2}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, o));
    };
    report(1, lognormal_limit(dir.path()));
    report(2, initial_condition_independence());
    let runs: Vec<NonlinearRun> = (1..=4).map(|ic| nonlinear_run(ic, 404)).collect();
    report(3, initial_condition_dependence(&runs));
    report(4, emerging_tails(&runs));
    report(5, crossover(&runs));
    report(6, tail_drift());
    report(7, replacement_robustness());
    report(8, parameter_recovery());
    report(9, oracle_equivalences());
    report(10, mean_variance());
    report(11, determinism(dir.path()));
    let failed: Vec<usize> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    println!("acceptance: {} of {} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
