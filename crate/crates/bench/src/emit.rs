//! Summary tables and per-run histories as CSV or JSON.
//!
//! CSV floats use 17 significant digits, which round-trips every `f64`.
//! Missing values are empty fields in CSV and `null` in JSON.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nlk_core::IterationRecord;
use serde::Serialize;

use crate::error::{BenchError, Result};
use crate::suite::{RunOutput, RunRecord};

pub const SUMMARY_HEADER: [&str; 10] = [
    "method",
    "problem",
    "m",
    "theta",
    "seed",
    "status",
    "iterations",
    "cpu_seconds",
    "final_residual",
    "speedup",
];

pub const HISTORY_HEADER: [&str; 8] = [
    "k",
    "residual_norm",
    "error_norm",
    "alpha",
    "beta",
    "delta",
    "block_size",
    "branch",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// Sort key of the summary table.
fn order(a: &RunRecord, b: &RunRecord) -> std::cmp::Ordering {
    (a.problem.as_str(), a.m, a.method, a.seed)
        .cmp(&(b.problem.as_str(), b.m, b.method, b.seed))
        .then(a.theta.total_cmp(&b.theta))
}

/// Records in table order.
pub fn sorted(records: &[RunRecord]) -> Vec<RunRecord> {
    let mut out = records.to_vec();
    out.sort_by(order);
    out
}

pub fn write_summary_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in sorted(records) {
        w.write_record([
            r.method.name().to_string(),
            r.problem.clone(),
            r.m.to_string(),
            format_float(r.theta),
            r.seed.to_string(),
            r.status.name().to_string(),
            r.iterations.to_string(),
            format_float(r.cpu_seconds),
            format_float(r.final_residual),
            format_opt(r.speedup),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn field<T: FromStr>(row: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = row.get(idx).unwrap_or("");
    raw.parse().map_err(|_| BenchError::Parse {
        line,
        reason: format!("column {} has invalid value {raw:?}", SUMMARY_HEADER[idx]),
    })
}

/// Parses a table written by [`write_summary_csv`].
pub fn read_summary_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(SUMMARY_HEADER) {
        return Err(BenchError::Parse {
            line: 1,
            reason: "unexpected header".into(),
        });
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let speedup = match row.get(9).unwrap_or("") {
            "" => None,
            _ => Some(field(&row, 9, line)?),
        };
        records.push(RunRecord {
            method: field(&row, 0, line)?,
            problem: row.get(1).unwrap_or("").to_string(),
            m: field(&row, 2, line)?,
            theta: field(&row, 3, line)?,
            seed: field(&row, 4, line)?,
            status: field(&row, 5, line)?,
            iterations: field(&row, 6, line)?,
            cpu_seconds: field(&row, 7, line)?,
            final_residual: field(&row, 8, line)?,
            speedup,
        });
    }
    Ok(records)
}

pub fn write_summary_json<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &sorted(records))?;
    Ok(())
}

pub fn write_history_csv<W: Write>(history: &[IterationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HISTORY_HEADER)?;
    for rec in history {
        let step = rec.step.as_ref();
        w.write_record([
            rec.k.to_string(),
            format_float(rec.residual_norm),
            format_opt(rec.error_norm),
            format_opt(step.and_then(|s| s.alpha)),
            format_opt(step.and_then(|s| s.beta)),
            format_opt(step.and_then(|s| s.delta)),
            step.map(|s| s.block_size.to_string()).unwrap_or_default(),
            step.map(|s| s.branch.name().to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct HistoryRow<'a> {
    k: usize,
    residual_norm: f64,
    error_norm: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    delta: Option<f64>,
    block_size: Option<usize>,
    branch: Option<&'a str>,
}

pub fn write_history_json<W: Write>(history: &[IterationRecord], out: W) -> Result<()> {
    let rows: Vec<HistoryRow> = history
        .iter()
        .map(|rec| {
            let step = rec.step.as_ref();
            HistoryRow {
                k: rec.k,
                residual_norm: rec.residual_norm,
                error_norm: rec.error_norm,
                alpha: step.and_then(|s| s.alpha),
                beta: step.and_then(|s| s.beta),
                delta: step.and_then(|s| s.delta),
                block_size: step.map(|s| s.block_size),
                branch: step.map(|s| s.branch.name()),
            }
        })
        .collect();
    serde_json::to_writer_pretty(out, &rows)?;
    Ok(())
}

pub fn write_history<W: Write>(history: &[IterationRecord], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_history_csv(history, out),
        OutputFormat::Json => write_history_json(history, out),
    }
}

pub fn write_summary<W: Write>(records: &[RunRecord], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_summary_csv(records, out),
        OutputFormat::Json => write_summary_json(records, out),
    }
}

/// `history_<problem>_m<m>_<method>_seed<seed>_theta<theta>.<ext>`.
pub fn history_file_name(record: &RunRecord, format: OutputFormat) -> String {
    format!(
        "history_{}_m{}_{}_seed{}_theta{}.{}",
        record.problem,
        record.m,
        record.method.name(),
        record.seed,
        record.theta,
        format.extension()
    )
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| BenchError::io(path, e))
}

/// Writes `summary.<ext>` and one history file per output that carries a
/// history into `dir` (created if needed). Returns the written paths,
/// summary first.
pub fn emit(outputs: &[RunOutput], format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let records: Vec<RunRecord> = outputs.iter().map(|o| o.record.clone()).collect();
    let summary = dir.join(format!("summary.{}", format.extension()));
    let mut written = vec![summary.clone()];
    let mut file = create(&summary)?;
    write_summary(&records, format, &mut file)?;
    file.flush().map_err(|e| BenchError::io(&summary, e))?;

    for output in outputs {
        let Some(history) = &output.history else { continue };
        let path = dir.join(history_file_name(&output.record, format));
        let mut file = create(&path)?;
        write_history(history, format, &mut file)?;
        file.flush().map_err(|e| BenchError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
