//! Simulation configuration: command-line flags over a JSON file over
//! built-in defaults.

use std::path::{Path, PathBuf};

use kesten_core::process::default_premultiplier;
use kesten_core::{AlphaLaw, InitialCondition, NctParams, Replacement, SavingsModel, SimulationConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_AGENTS: usize = 100_000;
pub const DEFAULT_HORIZON: usize = 300;
pub const DEFAULT_GAMMA: f64 = 1.075;

/// Savings as written in configs: `"zero"`, `"decile"`, or explicit coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SavingsSpec {
    Named(String),
    Coefficients { kappa1: f64, kappa2: f64, kappa3: f64 },
}

impl SavingsSpec {
    pub fn parse_flag(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() == 3 {
            let v = parse_floats(&parts, "savings")?;
            return Ok(SavingsSpec::Coefficients { kappa1: v[0], kappa2: v[1], kappa3: v[2] });
        }
        Ok(SavingsSpec::Named(s.to_string()))
    }

    pub fn model(&self) -> Result<SavingsModel> {
        match self {
            SavingsSpec::Named(n) if n == "zero" => Ok(SavingsModel::Zero),
            SavingsSpec::Named(n) if n == "decile" => Ok(SavingsModel::DECILE_FIT),
            SavingsSpec::Named(n) => Err(CliError::input(format!("unknown savings `{n}`; use zero, decile or k1,k2,k3"))),
            SavingsSpec::Coefficients { kappa1, kappa2, kappa3 } => Ok(SavingsModel::logistic(*kappa1, *kappa2, *kappa3)?),
        }
    }
}

/// Keys accepted in a simulation config file. Unknown keys are ignored so
/// that the output of `fit` can be passed directly.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct ConfigFile {
    pub gamma: Option<f64>,
    pub nct: Option<NctParams>,
    pub premultiplier: Option<f64>,
    pub positive_alpha: Option<bool>,
    pub alpha_constant: Option<f64>,
    pub savings: Option<SavingsSpec>,
    pub replacement: Option<Replacement>,
    pub init: Option<String>,
    pub agents: Option<usize>,
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
    pub observe: Option<Vec<usize>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: ConfigFile) -> ConfigFile {
        ConfigFile {
            gamma: over.gamma.or(self.gamma),
            nct: over.nct.or(self.nct),
            premultiplier: over.premultiplier.or(self.premultiplier),
            positive_alpha: over.positive_alpha.or(self.positive_alpha),
            alpha_constant: over.alpha_constant.or(self.alpha_constant),
            savings: over.savings.or(self.savings),
            replacement: over.replacement.or(self.replacement),
            init: over.init.or(self.init),
            agents: over.agents.or(self.agents),
            horizon: over.horizon.or(self.horizon),
            seed: over.seed.or(self.seed),
            observe: over.observe.or(self.observe),
        }
    }
}

/// Every setting of a run, after defaults, as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub gamma: f64,
    pub alpha: AlphaLaw,
    pub savings: SavingsModel,
    pub replacement: Replacement,
    pub init: String,
    pub agents: usize,
    pub horizon: usize,
    pub seed: u64,
    pub observe: Vec<usize>,
    #[serde(skip)]
    pub bootstrap_path: Option<PathBuf>,
    #[serde(skip)]
    pub initial: InitialCondition,
    #[serde(skip)]
    pub defaults_used: Vec<String>,
}

impl Resolved {
    pub fn from_file(f: ConfigFile) -> Result<Self> {
        let mut defaults_used = Vec::new();
        let mut default = |key: &str| defaults_used.push(key.to_string());
        let seed = f.seed.ok_or_else(|| CliError::input("a seed is required (--seed or \"seed\" in the config file)"))?;
        let gamma = f.gamma.unwrap_or_else(|| {
            default("gamma");
            DEFAULT_GAMMA
        });
        let alpha = match f.alpha_constant {
            Some(value) => AlphaLaw::Constant { value },
            None => {
                let params = f.nct.unwrap_or_else(|| {
                    default("nct");
                    NctParams::BILLIONAIRE
                });
                let premultiplier = f.premultiplier.unwrap_or_else(|| {
                    default("premultiplier");
                    default_premultiplier(gamma)
                });
                let positive_only = f.positive_alpha.unwrap_or_else(|| {
                    default("positive_alpha");
                    false
                });
                AlphaLaw::Nct { params, premultiplier, positive_only }
            }
        };
        let savings_spec = f.savings.unwrap_or_else(|| {
            default("savings");
            SavingsSpec::Named("zero".into())
        });
        let savings = savings_spec.model()?;
        let replacement = f.replacement.unwrap_or_else(|| {
            default("replacement");
            Replacement::R1
        });
        let init = f.init.unwrap_or_else(|| {
            default("init");
            "i1".into()
        });
        let (initial, bootstrap_path) = parse_init(&init)?;
        let agents = f.agents.unwrap_or_else(|| {
            default("agents");
            DEFAULT_AGENTS
        });
        let horizon = f.horizon.unwrap_or_else(|| {
            default("horizon");
            DEFAULT_HORIZON
        });
        let observe = match f.observe {
            Some(mut o) => {
                o.sort_unstable();
                o.dedup();
                if let Some(&bad) = o.iter().find(|&&t| t > horizon) {
                    return Err(CliError::input(format!("observation time {bad} is beyond the horizon {horizon}")));
                }
                o
            }
            None => {
                default("observe");
                let base: &[usize] = if savings == SavingsModel::Zero {
                    &SimulationConfig::GENERIC_OBSERVATIONS
                } else {
                    &SimulationConfig::REALISTIC_OBSERVATIONS
                };
                let mut o: Vec<usize> = base.iter().copied().filter(|&t| t <= horizon).collect();
                if o.last() != Some(&horizon) {
                    o.push(horizon);
                }
                o
            }
        };
        Ok(Resolved {
            gamma,
            alpha,
            savings,
            replacement,
            init,
            agents,
            horizon,
            seed,
            observe,
            bootstrap_path,
            initial,
            defaults_used,
        })
    }

    pub fn simulation_config(&self) -> SimulationConfig {
        SimulationConfig {
            gamma: self.gamma,
            alpha: self.alpha,
            savings: self.savings,
            replacement: self.replacement,
            initial: self.initial.clone(),
            n_agents: self.agents,
            horizon: self.horizon,
            master_seed: self.seed,
            observation_times: self.observe.clone(),
        }
    }
}

fn parse_floats(parts: &[&str], what: &str) -> Result<Vec<f64>> {
    parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| CliError::input(format!("{what}: cannot parse `{p}` as a number"))))
        .collect()
}

/// `i1`..`i4`, `constant:W`, `shifted-exp:FLOOR:MEAN`, `exp:MEAN`,
/// `pareto:XM:BETA` or `bootstrap:TAIL.csv`.
pub fn parse_init(spec: &str) -> Result<(InitialCondition, Option<PathBuf>)> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let args: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
    let want = |n: usize| -> Result<Vec<f64>> {
        if args.len() != n {
            return Err(CliError::input(format!("init `{spec}`: expected {n} argument(s)")));
        }
        parse_floats(&args, "init")
    };
    let ic = match kind {
        "i1" | "i2" | "i3" | "i4" if args.is_empty() => {
            InitialCondition::generic(kind[1..].parse().expect("digit")).expect("1..=4")
        }
        "constant" => InitialCondition::Constant { wealth: want(1)?[0] },
        "shifted-exp" => {
            let v = want(2)?;
            InitialCondition::ShiftedExp { floor: v[0], mean: v[1] }
        }
        "exp" => InitialCondition::Exp { mean: want(1)?[0] },
        "pareto" => {
            let v = want(2)?;
            InitialCondition::Pareto { x_m: v[0], beta: v[1] }
        }
        "bootstrap" if !rest.is_empty() => {
            let path = PathBuf::from(rest);
            let tail = kesten_core::formats::read_tail_file(&path).map_err(|e| CliError::in_file(&path, e))?;
            return Ok((InitialCondition::Bootstrap { tail }, Some(path)));
        }
        _ => return Err(CliError::input(format!("unknown initial condition `{spec}`"))),
    };
    Ok((ic, None))
}
