//! `kesten`: ingest survey data, fit model parameters, simulate populations
//! and render reports. All wealth values are in GBP.

mod config;
mod error;
mod fit;
mod ingest;
mod manifest;
mod report;
mod simulate;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "kesten", version, about = "Non-linear Kesten wealth model pipeline (wealth in GBP)")]
struct Cli {
    /// Worker threads for simulation; results do not depend on this.
    #[arg(long, global = true, env = "KESTEN_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a Lorenz survey (plus optional rich list) into an empirical tail.
    Ingest(ingest::IngestArgs),
    /// Fit return, α-law and savings parameters.
    Fit(fit::FitArgs),
    /// Run the wealth process and write trajectories and a checkpoint.
    Simulate(simulate::SimulateArgs),
    /// Render SVG plots and a text summary for a run directory.
    Report(report::ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Ingest(a) => ingest::run(a),
        Command::Fit(a) => fit::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Report(a) => report::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CliError::exit_code(&e) as u8)
        }
    }
}
