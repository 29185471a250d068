//! Report writers. Every file starts with the effective configuration so a
//! result can be traced back to the run that produced it.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, Options};

/// Bumped when a CSV column set changes.
pub const SCHEMA_VERSION: u32 = 1;

/// A flat table for CSV, and a structured value for JSON.
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub results: Value,
}

impl Report {
    pub fn new(columns: Vec<&'static str>, results: impl Serialize) -> Result<Self> {
        Ok(Self { columns, rows: Vec::new(), results: serde_json::to_value(results)? })
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }
}

/// Shortest round-trip text for a float; `inf` / `nan` spelled out.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        x.to_string()
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn render(report: &Report, config: &Options, format: Format) -> Result<Vec<u8>> {
    let config_json = serde_json::to_value(config)?;
    match format {
        Format::Json => {
            pretty_json(&json!({ "schema_version": SCHEMA_VERSION, "config": config_json, "results": report.results }))
        }
        Format::Csv => {
            let mut out = format!("# config: {}\n", serde_json::to_string(&config_json)?).into_bytes();
            {
                let mut w = csv::Writer::from_writer(&mut out);
                let mut header = vec!["schema_version"];
                header.extend(&report.columns);
                w.write_record(&header)?;
                let version = SCHEMA_VERSION.to_string();
                for row in &report.rows {
                    w.write_record(std::iter::once(&version).chain(row))?;
                }
                w.flush()?;
            }
            Ok(out)
        }
    }
}

pub fn pretty_json(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}
