use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::Args;
use kesten_core::formats::{self, CheckpointMeta, ALPHA_HEADER};
use kesten_core::process::ProcessError;
use kesten_core::{empirical_tail, Lane, NctParams, Replacement, RngStream, Simulation, Summary};

use crate::config::{ConfigFile, Resolved, SavingsSpec};
use crate::error::{CliError, Result};
use crate::manifest::{Failure, RunManifest, Status};

pub const INEQUALITY_FILE: &str = "inequality.csv";
pub const ALPHA_FILE: &str = "alpha_sample.csv";
pub const CHECKPOINT_STEM: &str = "final";
const ALPHA_SAMPLE_SIZE: usize = 20_000;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON config; the output of `fit` is accepted. Flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Noncentral-t parameters `k,c,l,s` of the α-law.
    #[arg(long)]
    nct: Option<String>,
    #[arg(long)]
    premultiplier: Option<f64>,
    /// Condition α on being positive.
    #[arg(long)]
    positive_alpha: bool,
    /// Use the same α for every agent and step instead of the noncentral-t law.
    #[arg(long, allow_hyphen_values = true)]
    alpha_constant: Option<f64>,
    /// zero, decile, or `k1,k2,k3`.
    #[arg(long)]
    savings: Option<String>,
    /// r1, r2 or r3.
    #[arg(long)]
    replacement: Option<String>,
    /// i1..i4, constant:W, shifted-exp:FLOOR:MEAN, exp:MEAN, pareto:XM:BETA, bootstrap:TAIL.csv
    #[arg(long)]
    init: Option<String>,
    /// Number of agents.
    #[arg(long, visible_alias = "n")]
    agents: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Master seed; required here or in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated observation times.
    #[arg(long, value_delimiter = ',')]
    observe: Option<Vec<usize>>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn flags(a: &SimulateArgs) -> Result<ConfigFile> {
    let nct = match &a.nct {
        Some(s) => {
            let v: Vec<f64> = s
                .split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|_| CliError::input(format!("--nct: cannot parse `{p}`"))))
                .collect::<Result<_>>()?;
            if v.len() != 4 {
                return Err(CliError::input("--nct needs four values k,c,l,s"));
            }
            Some(NctParams { k: v[0], c: v[1], l: v[2], s: v[3] })
        }
        None => None,
    };
    let replacement = match a.replacement.as_deref() {
        None => None,
        Some("r1") => Some(Replacement::R1),
        Some("r2") => Some(Replacement::R2),
        Some("r3") => Some(Replacement::R3),
        Some(other) => return Err(CliError::input(format!("unknown replacement `{other}`; use r1, r2 or r3"))),
    };
    Ok(ConfigFile {
        gamma: a.gamma,
        nct,
        premultiplier: a.premultiplier,
        positive_alpha: a.positive_alpha.then_some(true),
        alpha_constant: a.alpha_constant,
        savings: a.savings.as_deref().map(SavingsSpec::parse_flag).transpose()?,
        replacement,
        init: a.init.clone(),
        agents: a.agents,
        horizon: a.horizon,
        seed: a.seed,
        observe: a.observe.clone(),
    })
}

pub fn tail_file_name(step: usize) -> String {
    format!("tail_n{step:04}.csv")
}

/// Records the outcome in the manifest and passes the result through.
pub fn finish(m: &mut RunManifest, dir: &Path, result: Result<()>, step: Option<usize>) -> Result<()> {
    match &result {
        Ok(()) => m.status = Status::Complete,
        Err(e) => {
            m.status = Status::Failed;
            m.failure = Some(Failure { step, message: e.to_string() });
        }
    }
    m.write(dir)?;
    result
}

fn failed_step(e: &ProcessError) -> Option<usize> {
    match *e {
        ProcessError::Overflow { step, .. } | ProcessError::AllBankrupt { step } => Some(step),
        _ => None,
    }
}

pub fn run(a: SimulateArgs) -> Result<()> {
    let base = match &a.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let resolved = Resolved::from_file(base.overlay(flags(&a)?))?;
    let config = resolved.simulation_config();
    config.validate()?;

    let mut m = RunManifest::new("simulate", serde_json::to_value(&resolved)?);
    m.seed = Some(resolved.seed);
    m.defaults_used = resolved.defaults_used.clone();
    m.observation_times = resolved.observe.clone();
    if let Some(p) = &a.config {
        m.add_input(p)?;
    }
    if let Some(p) = &resolved.bootstrap_path {
        m.add_input(p)?;
    }
    m.outputs = resolved.observe.iter().map(|&t| tail_file_name(t)).collect();
    m.outputs.extend([
        INEQUALITY_FILE.to_string(),
        ALPHA_FILE.to_string(),
        format!("{CHECKPOINT_STEM}.txt"),
        format!("{CHECKPOINT_STEM}.json"),
    ]);
    fs::create_dir_all(&a.out)?;
    m.write(&a.out)?;

    let out = a.out.clone();
    let write_err = |p: &Path, e| CliError::in_file(p, e);
    let mut summaries: Vec<Summary> = Vec::new();
    let mut fail_step = None;

    let result = (|| -> Result<()> {
        let sampler = config.alpha.sampler()?;
        let mut rng = RngStream::for_agent(config.master_seed, 0, 0, Lane::AUXILIARY);
        let alpha: Vec<f64> = (0..ALPHA_SAMPLE_SIZE).map(|_| sampler.draw(&mut rng)).collect();
        let p = out.join(ALPHA_FILE);
        formats::write_column_file(&p, &ALPHA_HEADER, &alpha).map_err(|e| write_err(&p, e))?;

        let mut sim = Simulation::new(config.clone())?;
        let observe = |sim: &Simulation, summaries: &mut Vec<Summary>| -> Result<()> {
            let pop = sim.population();
            summaries.push(Summary::of(pop));
            if config.observation_times.contains(&pop.step) {
                let tail = empirical_tail(&pop.wealth)?;
                let p = out.join(tail_file_name(pop.step));
                formats::write_tail_file(&p, &tail).map_err(|e| write_err(&p, e))?;
            }
            Ok(())
        };
        observe(&sim, &mut summaries)?;
        for _ in 0..config.horizon {
            if let Err(e) = sim.advance() {
                fail_step = failed_step(&e);
                return Err(e.into());
            }
            observe(&sim, &mut summaries)?;
        }
        let pop = sim.population();
        let meta = CheckpointMeta {
            step: pop.step,
            seed: config.master_seed,
            config_hash: m.config_hash.clone(),
            n_agents: pop.len(),
            bankruptcies_total: pop.total_bankruptcies(),
        };
        formats::write_checkpoint(&out, CHECKPOINT_STEM, &pop.wealth, &meta).map_err(|e| write_err(&out, e))?;
        let last = summaries.last().expect("initial summary");
        println!(
            "step {}  gini {:.6}  top 1% share {:.6}  bankruptcies {}  total wealth {:e} GBP",
            last.step, last.gini, last.top_share_1pct, last.bankruptcies, last.total_wealth
        );
        Ok(())
    })();

    // The series is kept even when the run stops early.
    let p = out.join(INEQUALITY_FILE);
    let series = File::create(&p)
        .map_err(|e| CliError::input(format!("{}: {e}", p.display())))
        .and_then(|f| formats::write_inequality_series(BufWriter::new(f), &summaries).map_err(|e| CliError::input(e.to_string())));
    let result = result.and(series);
    finish(&mut m, &a.out, result, fail_step)
}
