use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use clap::Args;
use kesten_core::formats::{self, ALPHA_HEADER};
use kesten_core::tailstats::FitWindow;
use kesten_core::{fit_power_law, kernel_density, EmpiricalTail, PowerLawFit};

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::simulate::{ALPHA_FILE, INEQUALITY_FILE};
use crate::svg::{chart, thin_log, Series};

pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `ingest` or `simulate`.
    #[arg(long)]
    run: PathBuf,
    /// Lower wealth bound of the power-law fit window (default: 99th percentile).
    #[arg(long)]
    window_lo: Option<f64>,
    /// Upper wealth bound of the fit window (default: last wealth exceeded by 10 households).
    #[arg(long)]
    window_hi: Option<f64>,
}

fn tail_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with("tail") && name.ends_with(".csv")
        })
        .collect();
    out.sort();
    Ok(out)
}

fn fit(tail: &EmpiricalTail, a: &ReportArgs) -> std::result::Result<PowerLawFit, String> {
    let default = FitWindow::default_for(tail).map_err(|e| e.to_string());
    let window = match (a.window_lo, a.window_hi, default) {
        (Some(lo), Some(hi), _) => FitWindow { lo, hi },
        (lo, hi, Ok(d)) => FitWindow { lo: lo.unwrap_or(d.lo), hi: hi.unwrap_or(d.hi) },
        (_, _, Err(e)) => return Err(e),
    };
    fit_power_law(tail, window).map_err(|e| e.to_string())
}

fn tail_chart(name: &str, tail: &EmpiricalTail, fit: Option<&PowerLawFit>) -> String {
    let pts: Vec<(f64, f64)> = tail.points().iter().filter(|p| p.exceedance > 0.0).map(|p| (p.wealth, p.exceedance)).collect();
    let mut series = vec![Series { label: "empirical tail".into(), points: thin_log(&pts, 200.0), markers: true }];
    if let Some(f) = fit {
        let line = (0..=50)
            .map(|i| {
                let w = f.window.lo * (f.window.hi / f.window.lo).powf(i as f64 / 50.0);
                (w, f.exceedance(w))
            })
            .collect();
        series.push(Series { label: format!("power law, beta = {:.3}", f.beta), points: line, markers: false });
    }
    chart(name, "wealth (GBP)", "fraction of households above", true, true, &series)
}

pub fn run(a: ReportArgs) -> Result<()> {
    let manifest = RunManifest::read(&a.run)?;
    let tails = tail_files(&a.run)?;
    let inequality = a.run.join(INEQUALITY_FILE);
    if tails.is_empty() && !inequality.exists() {
        return Err(CliError::MissingArtifact(format!("{}: no tail or inequality CSV", a.run.display())));
    }
    let mut summary = String::new();
    let _ = writeln!(summary, "{} run, status {:?}, config {}", manifest.command, manifest.status, &manifest.config_hash[..12]);

    for path in &tails {
        let tail = formats::read_tail_file(path).map_err(|e| CliError::in_file(path, e))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("tail").to_string();
        let fitted = fit(&tail, &a);
        match &fitted {
            Ok(f) => {
                let _ = writeln!(
                    summary,
                    "{stem}: {} points, beta {:.4}, window [{:.6e}, {:.6e}], r2 {:.4}",
                    tail.len(),
                    f.beta,
                    f.window.lo,
                    f.window.hi,
                    f.r_squared
                );
            }
            Err(e) => {
                let _ = writeln!(summary, "{stem}: {} points, no power-law fit ({e})", tail.len());
            }
        }
        fs::write(a.run.join(format!("{stem}.svg")), tail_chart(&stem, &tail, fitted.as_ref().ok()))?;
    }

    if inequality.exists() {
        let rows = File::open(&inequality)
            .map_err(CliError::from)
            .and_then(|f| formats::read_inequality_series(f).map_err(|e| CliError::in_file(&inequality, e)))?;
        let gini = rows.iter().map(|r| (r.step as f64, r.gini)).collect();
        let top = rows.iter().map(|r| (r.step as f64, r.top_share_1pct)).collect();
        let svg = chart(
            "inequality",
            "period n",
            "share",
            false,
            false,
            &[
                Series { label: "Gini".into(), points: gini, markers: false },
                Series { label: "top 1% share".into(), points: top, markers: false },
            ],
        );
        fs::write(a.run.join("inequality.svg"), svg)?;
        if let Some(last) = rows.last() {
            let _ = writeln!(
                summary,
                "inequality at n={}: gini {:.6}, top 1% share {:.6}, bankruptcies {}",
                last.step, last.gini, last.top_share_1pct, last.bankruptcies
            );
        }
    }

    let alpha = a.run.join(ALPHA_FILE);
    if alpha.exists() {
        let xs = formats::read_column_file(&alpha, &ALPHA_HEADER).map_err(|e| CliError::in_file(&alpha, e))?;
        // Heavy tails would stretch the grid; the density is shown over the central 98%.
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = (sorted[sorted.len() / 100], sorted[sorted.len() - 1 - sorted.len() / 100]);
        let kept: Vec<f64> = sorted.into_iter().filter(|x| (lo..=hi).contains(x)).collect();
        match kernel_density(&kept, None, 512) {
            Ok(curve) => {
                let pts = curve.x.iter().copied().zip(curve.density.iter().copied()).collect();
                let svg = chart("alpha density", "alpha", "density", false, false, &[Series { label: "kernel density".into(), points: pts, markers: false }]);
                fs::write(a.run.join("alpha_density.svg"), svg)?;
            }
            Err(e) => {
                let _ = writeln!(summary, "alpha density skipped: {e}");
            }
        }
    }

    fs::write(a.run.join(SUMMARY_FILE), &summary)?;
    print!("{summary}");
    Ok(())
}
