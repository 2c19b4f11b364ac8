//! Strict CSV and JSON formats for tails, surveys, rich lists, budget
//! deciles, population checkpoints and diagnostics.
//!
//! Readers insist on the exact header and on one finite number per field;
//! anything else is an error naming the line and column. Writers emit
//! shortest round-trip decimal text, so a written file reads back bit-exact.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::empirics::{DecileRow, EmpiricsError, LorenzSurvey, RichList};
use crate::tailstats::{EmpiricalTail, TailError, TailPoint};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("missing column `{column}` in header `{found}`")]
    MissingColumn { column: String, found: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount { line: u64, expected: usize, found: usize },
    #[error("line {line}, column `{column}`: cannot parse `{value}` as a finite number")]
    Number { line: u64, column: String, value: String },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Tail(#[from] TailError),
    #[error(transparent)]
    Empirics(#[from] EmpiricsError),
}

impl FormatError {
    fn io(path: &Path, source: io::Error) -> Self {
        FormatError::Io { path: path.display().to_string(), source }
    }
}

pub const TAIL_HEADER: [&str; 2] = ["wealth", "exceedance"];
pub const SURVEY_HEADER: [&str; 2] = ["cum_household_prop", "cum_wealth_prop"];
pub const RICH_LIST_HEADER: [&str; 2] = ["rank", "wealth_gbp"];
pub const DECILE_HEADER: [&str; 3] = ["median_wealth_gbp", "disposable_income_gbp", "expenditure_gbp"];
pub const DIAGNOSTIC_HEADER: [&str; 2] = ["n", "x_over_gamma_n"];
pub const INEQUALITY_HEADER: [&str; 5] = ["n", "gini", "s01", "bankruptcies", "total_wealth"];
pub const ROR_HEADER: [&str; 2] = ["wealth", "ror"];
pub const ALPHA_HEADER: [&str; 1] = ["alpha"];

/// Shortest decimal text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn open(path: &Path) -> Result<BufReader<File>, FormatError> {
    File::open(path).map(BufReader::new).map_err(|e| FormatError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, FormatError> {
    File::create(path).map(BufWriter::new).map_err(|e| FormatError::io(path, e))
}

/// Reads a numeric CSV with exactly the given header into rows of `f64`.
pub fn read_numeric_csv<R: Read>(reader: R, header: &[&str]) -> Result<Vec<Vec<f64>>, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let found_joined = found.join(",");
    for col in header {
        if !found.iter().any(|f| f == col) {
            return Err(FormatError::MissingColumn { column: col.to_string(), found: found_joined });
        }
    }
    if found.len() != header.len() || found.iter().zip(header).any(|(a, b)| a != b) {
        return Err(FormatError::Header { expected: header.join(","), found: found_joined });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(FormatError::FieldCount { line, expected: header.len(), found: rec.len() });
        }
        let mut row = Vec::with_capacity(header.len());
        for (field, col) in rec.iter().zip(header) {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => return Err(FormatError::Number { line, column: col.to_string(), value: field.to_string() }),
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Writes rows under `header` using [`fmt_f64`].
pub fn write_numeric_csv<W: Write>(mut w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()
}

fn write_file(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), FormatError> {
    write_numeric_csv(create(path)?, header, rows).map_err(|e| FormatError::io(path, e))
}

fn read_file(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>, FormatError> {
    read_numeric_csv(open(path)?, header)
}

pub fn read_tail<R: Read>(reader: R) -> Result<EmpiricalTail, FormatError> {
    let rows = read_numeric_csv(reader, &TAIL_HEADER)?;
    let points = rows.into_iter().map(|r| TailPoint { wealth: r[0], exceedance: r[1] }).collect();
    Ok(EmpiricalTail::new(points, None)?)
}

pub fn write_tail<W: Write>(w: W, tail: &EmpiricalTail) -> io::Result<()> {
    write_numeric_csv(w, &TAIL_HEADER, tail.points().iter().map(|p| vec![p.wealth, p.exceedance]))
}

pub fn read_tail_file(path: &Path) -> Result<EmpiricalTail, FormatError> {
    read_tail(open(path)?)
}

pub fn write_tail_file(path: &Path, tail: &EmpiricalTail) -> Result<(), FormatError> {
    write_tail(create(path)?, tail).map_err(|e| FormatError::io(path, e))
}

/// Survey totals stored next to the Lorenz CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyMeta {
    pub year: i32,
    pub households: f64,
    pub total_wealth_gbp: f64,
}

pub fn read_survey<R: Read>(csv: R, meta: &SurveyMeta) -> Result<LorenzSurvey, FormatError> {
    let rows = read_numeric_csv(csv, &SURVEY_HEADER)?;
    let rows = rows.into_iter().map(|r| (r[0], r[1])).collect();
    Ok(LorenzSurvey::new(meta.year, rows, meta.households, meta.total_wealth_gbp)?)
}

pub fn write_survey<W: Write>(w: W, survey: &LorenzSurvey) -> io::Result<()> {
    write_numeric_csv(w, &SURVEY_HEADER, survey.rows.iter().map(|&(h, x)| vec![h, x]))
}

pub fn read_survey_meta<R: Read>(reader: R) -> Result<SurveyMeta, FormatError> {
    Ok(serde_json::from_reader(reader)?)
}

pub fn read_survey_files(csv: &Path, meta: &Path) -> Result<LorenzSurvey, FormatError> {
    let m = read_survey_meta(open(meta)?)?;
    read_survey(open(csv)?, &m)
}

/// Ranks must be `1..=R` in some order; rank 1 is the richest.
pub fn read_rich_list<R: Read>(reader: R, year: i32, households: f64) -> Result<RichList, FormatError> {
    let rows = read_numeric_csv(reader, &RICH_LIST_HEADER)?;
    let r = rows.len();
    let mut seen = vec![false; r];
    for (i, row) in rows.iter().enumerate() {
        let rank = row[0];
        let line = i as u64 + 2;
        if rank.fract() != 0.0 || rank < 1.0 || rank > r as f64 || seen[rank as usize - 1] {
            return Err(FormatError::Row { line, message: format!("rank {rank} is not a unique integer in 1..={r}") });
        }
        seen[rank as usize - 1] = true;
    }
    Ok(RichList::new(year, rows.into_iter().map(|row| row[1]).collect(), households)?)
}

pub fn write_rich_list<W: Write>(w: W, rich: &RichList) -> io::Result<()> {
    let mut sorted = rich.wealth.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    write_numeric_csv(w, &RICH_LIST_HEADER, sorted.into_iter().enumerate().map(|(i, x)| vec![(i + 1) as f64, x]))
}

pub fn read_deciles<R: Read>(reader: R) -> Result<Vec<DecileRow>, FormatError> {
    Ok(read_numeric_csv(reader, &DECILE_HEADER)?
        .into_iter()
        .map(|r| DecileRow { median_wealth: r[0], disposable_income: r[1], expenditure: r[2] })
        .collect())
}

pub fn write_deciles<W: Write>(w: W, rows: &[DecileRow]) -> io::Result<()> {
    write_numeric_csv(w, &DECILE_HEADER, rows.iter().map(|r| vec![r.median_wealth, r.disposable_income, r.expenditure]))
}

/// Pairs of numbers under a two-column header.
pub fn read_pairs_file(path: &Path, header: &[&str; 2]) -> Result<Vec<(f64, f64)>, FormatError> {
    Ok(read_file(path, header)?.into_iter().map(|r| (r[0], r[1])).collect())
}

pub fn write_pairs_file(path: &Path, header: &[&str; 2], pairs: &[(f64, f64)]) -> Result<(), FormatError> {
    write_file(path, header, pairs.iter().map(|&(a, b)| vec![a, b]))
}

pub fn read_column_file(path: &Path, header: &[&str; 1]) -> Result<Vec<f64>, FormatError> {
    Ok(read_file(path, header)?.into_iter().map(|r| r[0]).collect())
}

pub fn write_column_file(path: &Path, header: &[&str; 1], xs: &[f64]) -> Result<(), FormatError> {
    write_file(path, header, xs.iter().map(|&x| vec![x]))
}

/// `(n, X_n/γⁿ)` rows.
pub fn write_diagnostic<W: Write>(w: W, scaled_log_wealth: &[f64]) -> io::Result<()> {
    write_numeric_csv(w, &DIAGNOSTIC_HEADER, scaled_log_wealth.iter().enumerate().map(|(n, &y)| vec![n as f64, y]))
}

pub fn read_diagnostic<R: Read>(reader: R) -> Result<Vec<f64>, FormatError> {
    let rows = read_numeric_csv(reader, &DIAGNOSTIC_HEADER)?;
    for (i, r) in rows.iter().enumerate() {
        if r[0] != i as f64 {
            return Err(FormatError::Row { line: i as u64 + 2, message: format!("expected n = {i}, found {}", r[0]) });
        }
    }
    Ok(rows.into_iter().map(|r| r[1]).collect())
}

/// Sidecar of a population checkpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointMeta {
    pub step: usize,
    pub seed: u64,
    pub config_hash: String,
    pub n_agents: usize,
    pub bankruptcies_total: u64,
}

/// One wealth value per line.
pub fn write_population<W: Write>(mut w: W, wealth: &[f64]) -> io::Result<()> {
    for &x in wealth {
        writeln!(w, "{}", fmt_f64(x))?;
    }
    w.flush()
}

pub fn read_population<R: Read>(reader: R) -> Result<Vec<f64>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| FormatError::Io { path: "<population>".into(), source: e })?;
        let t = line.trim();
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => out.push(v),
            _ => {
                return Err(FormatError::Number { line: i as u64 + 1, column: "wealth".into(), value: t.to_string() })
            }
        }
    }
    Ok(out)
}

/// Writes `<stem>.txt` and `<stem>.json`.
pub fn write_checkpoint(dir: &Path, stem: &str, wealth: &[f64], meta: &CheckpointMeta) -> Result<(), FormatError> {
    let pop = dir.join(format!("{stem}.txt"));
    write_population(create(&pop)?, wealth).map_err(|e| FormatError::io(&pop, e))?;
    let side = dir.join(format!("{stem}.json"));
    let mut f = create(&side)?;
    serde_json::to_writer_pretty(&mut f, meta)?;
    writeln!(f).and_then(|_| f.flush()).map_err(|e| FormatError::io(&side, e))
}

pub fn read_checkpoint(dir: &Path, stem: &str) -> Result<(Vec<f64>, CheckpointMeta), FormatError> {
    let wealth = read_population(open(&dir.join(format!("{stem}.txt")))?)?;
    let meta: CheckpointMeta = serde_json::from_reader(open(&dir.join(format!("{stem}.json")))?)?;
    if meta.n_agents != wealth.len() {
        return Err(FormatError::Row {
            line: 0,
            message: format!("sidecar lists {} agents, population file has {}", meta.n_agents, wealth.len()),
        });
    }
    Ok((wealth, meta))
}

/// One row per observation time.
pub fn write_inequality_series<W: Write>(w: W, rows: &[crate::process::Summary]) -> io::Result<()> {
    write_numeric_csv(
        w,
        &INEQUALITY_HEADER,
        rows.iter().map(|s| vec![s.step as f64, s.gini, s.top_share_1pct, s.bankruptcies as f64, s.total_wealth]),
    )
}

pub fn read_inequality_series<R: Read>(reader: R) -> Result<Vec<crate::process::Summary>, FormatError> {
    Ok(read_numeric_csv(reader, &INEQUALITY_HEADER)?
        .into_iter()
        .map(|r| crate::process::Summary {
            step: r[0] as usize,
            gini: r[1],
            top_share_1pct: r[2],
            bankruptcies: r[3] as u64,
            total_wealth: r[4],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tail_round_trip() {
        let t = crate::tailstats::empirical_tail(&[3.5, 1e-7, 2.25e40, 8.0]).unwrap();
        let mut buf = Vec::new();
        write_tail(&mut buf, &t).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("wealth,exceedance\n"));
        let back = read_tail(buf.as_slice()).unwrap();
        assert_eq!(back.points(), t.points());
    }

    #[test]
    fn strict_headers_and_numbers() {
        let err = read_tail("wealth,prob\n1,0\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("missing column `exceedance`"), "{err}");
        let err = read_tail("exceedance,wealth\n1,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, FormatError::Header { .. }));
        let err = read_tail("wealth,exceedance\n1,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, FormatError::Number { line: 2, .. }), "{err}");
        let err = read_tail("wealth,exceedance\n1,0.5\n2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, FormatError::FieldCount { line: 3, .. }), "{err}");
        let err = read_tail("wealth,exceedance\n1,NaN\n".as_bytes()).unwrap_err();
        assert!(matches!(err, FormatError::Number { .. }));
        assert!(read_tail("wealth,exceedance\n2,0.5\n1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn survey_and_rich_list() {
        let meta: SurveyMeta = read_survey_meta(r#"{"year":2008,"households":4,"total_wealth_gbp":100}"#.as_bytes()).unwrap();
        let csv = "cum_household_prop,cum_wealth_prop\n0,0\n0.25,0.05\n0.5,0.15\n0.75,0.35\n1,1\n";
        let s = read_survey(csv.as_bytes(), &meta).unwrap();
        assert_eq!(s.rows.len(), 5);
        let mut out = Vec::new();
        write_survey(&mut out, &s).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), csv);
        assert!(read_survey_meta(r#"{"year":2008,"households":4}"#.as_bytes()).is_err());

        let r = read_rich_list("rank,wealth_gbp\n2,500\n1,900\n".as_bytes(), 2008, 1e6).unwrap();
        assert_eq!(r.wealth, vec![500.0, 900.0]);
        let mut out = Vec::new();
        write_rich_list(&mut out, &r).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "rank,wealth_gbp\n1,900\n2,500\n");
        assert!(read_rich_list("rank,wealth_gbp\n1,500\n1,900\n".as_bytes(), 2008, 1e6).is_err());
    }

    #[test]
    fn deciles_round_trip() {
        let rows = vec![DecileRow { median_wealth: 1e4, disposable_income: 2e4, expenditure: 1.9e4 }];
        let mut out = Vec::new();
        write_deciles(&mut out, &rows).unwrap();
        assert_eq!(read_deciles(out.as_slice()).unwrap(), rows);
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let w = vec![1.0, 2.5e-3, 7.0e250, 123456.789];
        let meta = CheckpointMeta { step: 4, seed: 9, config_hash: "ab".into(), n_agents: 4, bankruptcies_total: 3 };
        write_checkpoint(dir.path(), "final", &w, &meta).unwrap();
        let (w2, m2) = read_checkpoint(dir.path(), "final").unwrap();
        assert_eq!(w, w2);
        assert_eq!(meta, m2);
    }

    #[test]
    fn diagnostic_round_trip() {
        let ys = vec![9.2, 9.1, 9.05];
        let mut out = Vec::new();
        write_diagnostic(&mut out, &ys).unwrap();
        assert!(String::from_utf8(out.clone()).unwrap().starts_with("n,x_over_gamma_n\n0,9.2\n"));
        assert_eq!(read_diagnostic(out.as_slice()).unwrap(), ys);
    }

    proptest! {
        #[test]
        fn float_text_round_trips(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL) {
            prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
