//! Per-run outcomes and aggregated records, with their CSV encodings.
//!
//! Method strings may contain commas, so every table goes through a CSV
//! writer that quotes fields as needed.

use std::path::{Path, PathBuf};

use stp_core::{fmt_f64, RunRecord};

use crate::error::{write_file, HarnessError, Result};
use crate::matrix::fmt_opt;

/// Header of `records.csv`.
pub const RECORDS_HEADER: [&str; 8] = [
    "eps",
    "problem",
    "method",
    "convexity",
    "replicates",
    "solved",
    "mean_evals_to_target",
    "total_evals",
];

/// Shortest round-tripping rendering of a tolerance, e.g. `1e-3`.
pub fn eps_label(eps: f64) -> String {
    format!("{eps:e}")
}

/// The outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub eps: f64,
    pub problem: String,
    pub method: String,
    pub replicate: usize,
    pub seed: u64,
    pub status: String,
    pub evals_to_target: Option<u64>,
    pub total_evals: u64,
    pub final_f: f64,
    /// Trace file, relative to the output directory.
    pub trace: PathBuf,
}

/// Replicates of one (tolerance, problem, method) triple, aggregated.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub eps: f64,
    pub problem: String,
    pub method: String,
    pub convexity: String,
    pub replicates: usize,
    pub solved: usize,
    /// Mean over the replicates that reached the target; absent when fewer
    /// than half did.
    pub mean_evals_to_target: Option<f64>,
    /// Evaluations spent by all replicates together.
    pub total_evals: u64,
}

impl RecordRow {
    pub fn run_record(&self) -> RunRecord {
        RunRecord {
            problem: self.problem.clone(),
            solver: self.method.clone(),
            mean_evals_to_target: self.mean_evals_to_target,
            n_replicates: self.replicates,
        }
    }

    pub fn is_convex(&self) -> bool {
        self.convexity == "convex" || self.convexity == "strongly_convex"
    }
}

/// A (problem, method) pair that was not run, and why.
#[derive(Debug, Clone, PartialEq)]
pub struct Skip {
    pub eps: f64,
    pub problem: String,
    pub method: String,
    pub reason: String,
}

fn to_csv<const N: usize>(header: [&str; N], rows: impl Iterator<Item = [String; N]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // Writing into memory cannot fail.
    w.write_record(header).expect("in-memory CSV");
    for row in rows {
        w.write_record(&row).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV of UTF-8 fields")
}

pub fn records_csv(rows: &[RecordRow]) -> String {
    to_csv(
        RECORDS_HEADER,
        rows.iter().map(|r| {
            [
                eps_label(r.eps),
                r.problem.clone(),
                r.method.clone(),
                r.convexity.clone(),
                r.replicates.to_string(),
                r.solved.to_string(),
                fmt_opt(r.mean_evals_to_target),
                r.total_evals.to_string(),
            ]
        }),
    )
}

pub fn runs_csv(runs: &[RunOutcome]) -> String {
    to_csv(
        [
            "eps",
            "problem",
            "method",
            "replicate",
            "seed",
            "status",
            "evals_to_target",
            "total_evals",
            "final_f",
            "trace",
        ],
        runs.iter().map(|r| {
            [
                eps_label(r.eps),
                r.problem.clone(),
                r.method.clone(),
                r.replicate.to_string(),
                r.seed.to_string(),
                r.status.clone(),
                r.evals_to_target
                    .map_or_else(|| "NA".to_string(), |e| e.to_string()),
                r.total_evals.to_string(),
                fmt_f64(r.final_f),
                r.trace.to_string_lossy().replace('\\', "/"),
            ]
        }),
    )
}

pub fn skipped_csv(skips: &[Skip]) -> String {
    to_csv(
        ["eps", "problem", "method", "reason"],
        skips.iter().map(|s| {
            [
                eps_label(s.eps),
                s.problem.clone(),
                s.method.clone(),
                s.reason.clone(),
            ]
        }),
    )
}

pub fn write_records(path: &Path, rows: &[RecordRow]) -> Result<()> {
    write_file(path, &records_csv(rows))
}

/// Parses `records.csv` text; malformed content is a configuration error
/// naming the `records` key.
pub fn parse_records(text: &str) -> Result<Vec<RecordRow>> {
    let bad = |msg: String| HarnessError::config("records", msg);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(RECORDS_HEADER) {
        return Err(bad(format!(
            "expected header `{}`",
            RECORDS_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = i + 2;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let num = |j: usize| -> Result<f64> {
            field(j).parse::<f64>().map_err(|_| {
                bad(format!(
                    "line {line}: `{}` is not a number in column `{}`",
                    field(j),
                    RECORDS_HEADER[j]
                ))
            })
        };
        let int = |j: usize| -> Result<u64> {
            field(j).parse::<u64>().map_err(|_| {
                bad(format!(
                    "line {line}: `{}` is not an integer in column `{}`",
                    field(j),
                    RECORDS_HEADER[j]
                ))
            })
        };
        rows.push(RecordRow {
            eps: num(0)?,
            problem: field(1).to_string(),
            method: field(2).to_string(),
            convexity: field(3).to_string(),
            replicates: int(4)? as usize,
            solved: int(5)? as usize,
            mean_evals_to_target: if field(6) == "NA" {
                None
            } else {
                Some(num(6)?)
            },
            total_evals: int(7)?,
        });
    }
    if rows.is_empty() {
        return Err(bad("no records".into()));
    }
    Ok(rows)
}

/// Reads a `records.csv` file.
pub fn read_records(path: &Path) -> Result<Vec<RecordRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_records(&text)
}
