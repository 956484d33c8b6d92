//! CSV and JSON rendering of run records and certificate reports.
//!
//! CSV files carry a mandatory header, LF line endings and floats written
//! with 17 significant digits, so reading a file back reproduces the stored
//! values exactly.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::algorithms::RunRecord;
use crate::certificates::{CertificateReport, CertificateRow};
use crate::error::{Error, Result};

pub const RUN_HEADER: &str = "k,f,best,step,gamma";
pub const CERTIFICATE_HEADER: &str = "k,gap,bound,margin";

/// One row of a run table. `step` and `gamma` describe the transition out of
/// `x_k` and are absent on the last row (and `gamma` for non-accelerated runs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRow {
    pub k: usize,
    pub f: f64,
    pub best: f64,
    pub step: Option<f64>,
    pub gamma: Option<f64>,
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn run_rows(rec: &RunRecord) -> Vec<RunRow> {
    (0..rec.f_hist.len())
        .map(|k| RunRow {
            k,
            f: rec.f_hist[k],
            best: rec.best_hist[k],
            step: rec.steps.get(k).copied(),
            gamma: rec.gammas.get(k).copied(),
        })
        .collect()
}

pub fn write_run_csv(rec: &RunRecord, mut out: impl Write) -> Result<()> {
    writeln!(out, "{RUN_HEADER}")?;
    for r in run_rows(rec) {
        writeln!(out, "{},{},{},{},{}", r.k, format_float(r.f), format_float(r.best), opt(r.step), opt(r.gamma))?;
    }
    Ok(())
}

pub fn write_certificate_csv(rep: &CertificateReport, mut out: impl Write) -> Result<()> {
    writeln!(out, "{CERTIFICATE_HEADER}")?;
    for r in &rep.rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.k,
            format_float(r.gap),
            format_float(r.bound),
            format_float(r.margin)
        )?;
    }
    Ok(())
}

fn records(input: impl BufRead, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut lines = input.lines();
    if lines.next().transpose()?.as_deref() != Some(header) {
        return Err(Error::Parse(format!("missing header `{header}`")));
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.ends_with('\r') {
            return Err(Error::Parse(format!("line {}: CR line ending", i + 2)));
        }
        let cells: Vec<String> = line.split(',').map(str::to_string).collect();
        if cells.len() != width {
            return Err(Error::Parse(format!("line {}: expected {width} cells, got {}", i + 2, cells.len())));
        }
        rows.push((i + 2, cells));
    }
    Ok(rows)
}

fn parse<T: std::str::FromStr>(line: usize, cell: &str) -> Result<T> {
    cell.parse()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse `{cell}`")))
}

fn parse_opt(line: usize, cell: &str) -> Result<Option<f64>> {
    if cell.is_empty() {
        Ok(None)
    } else {
        parse(line, cell).map(Some)
    }
}

pub fn read_run_csv(input: impl BufRead) -> Result<Vec<RunRow>> {
    records(input, RUN_HEADER)?
        .into_iter()
        .map(|(line, c)| {
            Ok(RunRow {
                k: parse(line, &c[0])?,
                f: parse(line, &c[1])?,
                best: parse(line, &c[2])?,
                step: parse_opt(line, &c[3])?,
                gamma: parse_opt(line, &c[4])?,
            })
        })
        .collect()
}

pub fn read_certificate_csv(input: impl BufRead) -> Result<Vec<CertificateRow>> {
    records(input, CERTIFICATE_HEADER)?
        .into_iter()
        .map(|(line, c)| {
            Ok(CertificateRow {
                k: parse(line, &c[0])?,
                gap: parse(line, &c[1])?,
                bound: parse(line, &c[2])?,
                margin: parse(line, &c[3])?,
            })
        })
        .collect()
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}
