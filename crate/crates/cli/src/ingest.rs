use std::fs::{self, File};
use std::path::PathBuf;

use clap::Args;
use kesten_core::empirics::{lorenz_to_tail, merge_rich_list};
use kesten_core::formats;
use serde_json::json;

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Lorenz CSV with header `cum_household_prop,cum_wealth_prop`.
    #[arg(long)]
    survey: PathBuf,
    /// JSON with `year`, `households` and `total_wealth_gbp`.
    #[arg(long)]
    meta: PathBuf,
    /// Rich-list CSV with header `rank,wealth_gbp`.
    #[arg(long)]
    rich_list: Option<PathBuf>,
    /// Output directory; receives `tail.csv` and `manifest.json`.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(a: IngestArgs) -> Result<()> {
    let config = json!({ "survey": a.survey, "meta": a.meta, "rich_list": a.rich_list });
    let mut m = RunManifest::new("ingest", config);
    m.add_input(&a.survey)?;
    m.add_input(&a.meta)?;
    if let Some(r) = &a.rich_list {
        m.add_input(r)?;
    }
    m.outputs = vec!["tail.csv".into()];
    fs::create_dir_all(&a.out)?;
    m.write(&a.out)?;

    let result = (|| -> Result<()> {
        let open = |p: &PathBuf| File::open(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())));
        let meta = formats::read_survey_meta(open(&a.meta)?).map_err(|e| CliError::in_file(&a.meta, e))?;
        let survey = formats::read_survey(open(&a.survey)?, &meta).map_err(|e| CliError::in_file(&a.survey, e))?;
        let mut tail = lorenz_to_tail(&survey).map_err(|e| CliError::input(format!("{}: {e}", a.survey.display())))?;
        let survey_points = tail.len();
        let mut rich_entries = 0;
        if let Some(path) = &a.rich_list {
            let rich = formats::read_rich_list(open(path)?, meta.year, meta.households).map_err(|e| CliError::in_file(path, e))?;
            rich_entries = rich.wealth.len();
            tail = merge_rich_list(&tail, &rich).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        }
        let out = a.out.join("tail.csv");
        formats::write_tail_file(&out, &tail).map_err(|e| CliError::in_file(&out, e))?;
        println!(
            "households {}  total wealth {} GBP  survey points {}  rich-list entries {}  tail points {}",
            meta.households,
            meta.total_wealth_gbp,
            survey_points,
            rich_entries,
            tail.len()
        );
        Ok(())
    })();
    crate::simulate::finish(&mut m, &a.out, result, None)
}
