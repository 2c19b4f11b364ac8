use std::collections::BTreeMap;
use std::fs::File;
use std::path::PathBuf;

use clap::Args;
use kesten_core::empirics::{
    alpha_from_ror, fit_ror_power, fit_savings, percentile_ror, select_gamma, GammaSelection,
};
use kesten_core::formats::{self, ALPHA_HEADER, ROR_HEADER};
use kesten_core::{fit_nct_mle, NctParams, SavingsModel};
use serde::Serialize;

use crate::config::SavingsSpec;
use crate::error::{CliError, Result};
use crate::manifest::sha256_hex;

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Tail CSVs in time order; consecutive pairs give percentile returns.
    #[arg(long = "tail")]
    tails: Vec<PathBuf>,
    /// Years between consecutive tails.
    #[arg(long, default_value_t = 2.0)]
    period: f64,
    /// Extra `wealth,ror` points pooled into the return fit.
    #[arg(long = "ror")]
    ror: Vec<PathBuf>,
    /// Fix γ and estimate only μ.
    #[arg(long)]
    gamma: Option<f64>,
    /// Choose γ where the mean α of two `wealth,ror` data sets agree, then fit μ at that γ.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    select_gamma: Option<Vec<PathBuf>>,
    /// Search interval for --select-gamma.
    #[arg(long, num_args = 2, default_values_t = [1.0, 1.5])]
    gamma_range: Vec<f64>,
    /// α samples (header `alpha`) for the noncentral-t fit.
    #[arg(long)]
    alpha: Option<PathBuf>,
    /// Fit the noncentral-t law to α = r/w^(γ−1) of the pooled returns.
    #[arg(long)]
    nct_from_ror: bool,
    /// Budget deciles for the savings fit.
    #[arg(long)]
    deciles: Option<PathBuf>,
    /// Saturation level of the savings curve.
    #[arg(long, default_value_t = 1e6)]
    kappa1: f64,
    /// Savings used in percentile returns: zero, decile, fitted or k1,k2,k3.
    /// Defaults to the fitted curve when deciles are given, else zero.
    #[arg(long)]
    savings: Option<String>,
    /// Also write the pooled `wealth,ror` points here.
    #[arg(long)]
    ror_out: Option<PathBuf>,
    /// Output parameter JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Serialize)]
struct Coefficients {
    kappa1: f64,
    kappa2: f64,
    kappa3: f64,
}

#[derive(Debug, Default, Serialize)]
struct Diagnostics {
    ror_points: usize,
    ror_excluded: usize,
    gamma_fixed: bool,
    period_years: f64,
    gamma_selection: Option<GammaSelection>,
    nct_samples: usize,
    nct_log_likelihood: Option<f64>,
    nct_converged_iterations: Option<usize>,
    savings_rss: Option<f64>,
    inputs: BTreeMap<String, String>,
}

#[derive(Debug, Serialize)]
struct FitOutput {
    gamma: Option<f64>,
    mu: Option<f64>,
    sigma: Option<f64>,
    nct: Option<NctParams>,
    savings: Option<Coefficients>,
    diagnostics: Diagnostics,
}

fn open(p: &PathBuf, inputs: &mut BTreeMap<String, String>) -> Result<File> {
    let bytes = std::fs::read(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
    inputs.insert(p.display().to_string(), sha256_hex(&bytes));
    File::open(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))
}

fn read_ror(p: &PathBuf, inputs: &mut BTreeMap<String, String>) -> Result<Vec<(f64, f64)>> {
    open(p, inputs)?;
    formats::read_pairs_file(p, &ROR_HEADER).map_err(|e| CliError::in_file(p, e))
}

pub fn run(a: FitArgs) -> Result<()> {
    let mut d = Diagnostics { period_years: a.period, ..Default::default() };
    if !(a.period > 0.0 && a.period.is_finite()) {
        return Err(CliError::input("--period must be positive"));
    }

    let mut fitted_savings = None;
    if let Some(p) = &a.deciles {
        let rows = formats::read_deciles(open(p, &mut d.inputs)?).map_err(|e| CliError::in_file(p, e))?;
        let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.median_wealth, r.excess_income())).collect();
        let fit = fit_savings(&pairs, a.kappa1)?;
        d.savings_rss = Some(fit.residual_sum_squares);
        fitted_savings = Some(fit.model);
    }
    let ror_savings = match a.savings.as_deref() {
        Some("fitted") => fitted_savings.ok_or_else(|| CliError::input("--savings fitted needs --deciles"))?,
        Some(s) => SavingsSpec::parse_flag(s)?.model()?,
        None => fitted_savings.unwrap_or(SavingsModel::Zero),
    };

    if a.tails.len() == 1 {
        return Err(CliError::input("percentile returns need at least two --tail files"));
    }
    let mut points = Vec::new();
    let mut tails = Vec::new();
    for p in &a.tails {
        tails.push(formats::read_tail(open(p, &mut d.inputs)?).map_err(|e| CliError::in_file(p, e))?);
    }
    for pair in tails.windows(2) {
        points.extend(percentile_ror(&pair[0], &pair[1], &ror_savings, a.period)?.points());
    }
    for p in &a.ror {
        points.extend(read_ror(p, &mut d.inputs)?);
    }
    if let Some(p) = &a.ror_out {
        formats::write_pairs_file(p, &ROR_HEADER, &points).map_err(|e| CliError::in_file(p, e))?;
    }

    let mut gamma = a.gamma;
    if let Some(files) = &a.select_gamma {
        let (lo, hi) = (a.gamma_range[0], a.gamma_range[1]);
        if !(lo < hi) {
            return Err(CliError::input("--gamma-range needs lo < hi"));
        }
        let sa = read_ror(&files[0], &mut d.inputs)?;
        let sb = read_ror(&files[1], &mut d.inputs)?;
        let sel = select_gamma(&sa, &sb, lo, hi)?;
        if sel.no_crossing {
            eprintln!("warning: mean α difference keeps one sign on [{lo}, {hi}]; using the boundary minimiser");
        }
        gamma = gamma.or(Some(sel.gamma));
        d.gamma_selection = Some(sel);
    }

    let (mut mu, mut sigma) = (None, None);
    if !points.is_empty() {
        let fit = fit_ror_power(&points, gamma)?;
        d.ror_points = fit.n_used;
        d.ror_excluded = fit.n_excluded;
        d.gamma_fixed = fit.gamma_fixed;
        gamma = Some(fit.gamma);
        mu = Some(fit.mu);
        sigma = Some(fit.sigma);
    }

    let alpha_samples = match (&a.alpha, a.nct_from_ror) {
        (Some(p), _) => {
            open(p, &mut d.inputs)?;
            Some(formats::read_column_file(p, &ALPHA_HEADER).map_err(|e| CliError::in_file(p, e))?)
        }
        (None, true) => {
            let g = gamma.ok_or_else(|| CliError::input("--nct-from-ror needs return data or --gamma"))?;
            Some(alpha_from_ror(&points, g))
        }
        (None, false) => None,
    };
    let nct = match alpha_samples {
        Some(xs) => {
            let fit = fit_nct_mle(&xs)?;
            d.nct_samples = xs.len();
            d.nct_log_likelihood = Some(fit.log_likelihood);
            d.nct_converged_iterations = Some(fit.iterations);
            Some(fit.params)
        }
        None => None,
    };

    let savings = match fitted_savings {
        Some(SavingsModel::Logistic { kappa1, kappa2, kappa3 }) => Some(Coefficients { kappa1, kappa2, kappa3 }),
        _ => None,
    };
    let out = FitOutput { gamma, mu, sigma, nct, savings, diagnostics: d };
    let mut text = serde_json::to_string_pretty(&out)?;
    text.push('\n');
    std::fs::write(&a.out, text).map_err(|e| CliError::input(format!("{}: {e}", a.out.display())))?;
    println!(
        "gamma {}  mu {}  sigma {}  nct {}  savings {}",
        fmt_opt(out.gamma),
        fmt_opt(out.mu),
        fmt_opt(out.sigma),
        out.nct.map_or("-".into(), |p| format!("({}, {}, {}, {})", p.k, p.c, p.l, p.s)),
        out.savings.as_ref().map_or("-".into(), |s| format!("({}, {}, {})", s.kappa1, s.kappa2, s.kappa3)),
    );
    Ok(())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v}"))
}
