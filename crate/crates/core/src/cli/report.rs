//! Sweep report serialization: CSV with `#` header comments, or JSON.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Format, SweepConfig};
use super::sweep::{SweepRow, SweepSummary};
use crate::error::{Error, Result};

pub const SCHEMA: u32 = 1;

pub const CSV_HEADER: [&str; 18] = [
    "x",
    "q",
    "a",
    "E_exact",
    "abs_E",
    "scaled_E",
    "bound_total",
    "ratio",
    "q0",
    "q1",
    "q2",
    "q3",
    "Q0",
    "Q1",
    "Q2",
    "Q3",
    "runtime_ms",
    "error",
];

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn opt_real(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

fn csv_record(r: &SweepRow) -> Vec<String> {
    let split: [String; 4] = match &r.split {
        Some(s) => s.map(|p| p.to_string()),
        None => Default::default(),
    };
    let targets: [String; 4] = r.targets.map(fmt_real);
    let mut rec = vec![
        r.x.to_string(),
        r.q.to_string(),
        r.a.to_string(),
        opt(&r.e_exact),
        opt_real(r.abs_e),
        opt_real(r.scaled_e),
        opt_real(r.bound_total),
        opt_real(r.ratio),
    ];
    rec.extend(split);
    rec.extend(targets);
    rec.push(opt(&r.runtime_ms));
    rec.push(opt(&r.error));
    rec
}

pub fn write_csv<W: Write>(out: W, config: &SweepConfig, rows: &[SweepRow]) -> Result<()> {
    let mut out = out;
    let io = |e: std::io::Error| Error::domain(format!("write failed: {e}"));
    writeln!(out, "# schema={SCHEMA}").map_err(io)?;
    writeln!(out, "# seed={}", config.seed).map_err(io)?;
    let echo = serde_json::to_string(config).map_err(|e| Error::domain(e.to_string()))?;
    writeln!(out, "# config={echo}").map_err(io)?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::domain(format!("csv write failed: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record(csv_record(r)).map_err(csv_err)?;
    }
    w.flush().map_err(io)
}

#[derive(Serialize, Deserialize)]
pub struct JsonReport {
    pub schema: u32,
    pub seed: u64,
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

pub fn write_json<W: Write>(
    mut out: W,
    config: &SweepConfig,
    rows: &[SweepRow],
    summary: &SweepSummary,
) -> Result<()> {
    let report = JsonReport {
        schema: SCHEMA,
        seed: config.seed,
        config: config.clone(),
        rows: rows.to_vec(),
        summary: summary.clone(),
    };
    serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Error::domain(e.to_string()))?;
    writeln!(out).map_err(|e| Error::domain(e.to_string()))
}

pub fn write_report<W: Write>(
    out: W,
    config: &SweepConfig,
    rows: &[SweepRow],
    summary: &SweepSummary,
) -> Result<()> {
    match config.format {
        Format::Csv => write_csv(out, config, rows),
        Format::Json => write_json(out, config, rows, summary),
    }
}

/// The fields of a stored row needed to recompute it.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredRow {
    pub x: u64,
    pub q: u64,
    pub a: i64,
    pub e_exact: Option<String>,
}

/// Reads a report written by [`write_report`], returning its seed and rows.
pub fn read_report(path: &Path) -> Result<(u64, Vec<StoredRow>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::domain(format!("cannot read {}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let report: JsonReport = serde_json::from_str(&text)
            .map_err(|e| Error::domain(format!("bad JSON report: {e}")))?;
        if report.schema != SCHEMA {
            return Err(Error::domain(format!(
                "unsupported schema {}",
                report.schema
            )));
        }
        let rows = report
            .rows
            .into_iter()
            .map(|r| StoredRow {
                x: r.x,
                q: r.q,
                a: r.a,
                e_exact: r.e_exact,
            })
            .collect();
        return Ok((report.seed, rows));
    }
    let mut seed = None;
    let mut schema = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some(v) = line.strip_prefix("# schema=") {
            schema = v.trim().parse::<u32>().ok();
        } else if let Some(v) = line.strip_prefix("# seed=") {
            seed = v.trim().parse::<u64>().ok();
        }
    }
    if schema != Some(SCHEMA) {
        return Err(Error::domain("missing or unsupported `# schema=` line"));
    }
    let seed = seed.ok_or_else(|| Error::domain("missing `# seed=` line"))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::domain(e.to_string()))?
        .clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::domain("CSV header does not match schema 1"));
    }
    let bad = |what: &str| Error::domain(format!("malformed {what} field"));
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::domain(e.to_string()))?;
        let e = rec[3].to_string();
        rows.push(StoredRow {
            x: rec[0].parse().map_err(|_| bad("x"))?,
            q: rec[1].parse().map_err(|_| bad("q"))?,
            a: rec[2].parse().map_err(|_| bad("a"))?,
            e_exact: (!e.is_empty()).then_some(e),
        });
    }
    Ok((seed, rows))
}
