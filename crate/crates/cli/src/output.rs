//! Report envelopes: one JSON document, or CSV preceded by `#` comment lines
//! echoing the tool version and resolved configuration.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Resolver;
use crate::error::{usage, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(()),
        }
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub struct Report {
    pub command: &'static str,
    pub result: Value,
    pub table: Table,
}

impl Report {
    pub fn new(command: &'static str, result: impl Serialize, table: Table) -> CliResult<Self> {
        let result = serde_json::to_value(result)
            .map_err(|e| usage(format!("cannot serialize report: {e}")))?;
        Ok(Report {
            command,
            result,
            table,
        })
    }
}

/// Shortest round-trip decimal; non-finite values spelled out.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::Number::from_f64(x)
            .map(|n| n.to_string())
            .unwrap_or_default()
    } else {
        x.to_string()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn render(report: &Report, resolver: &Resolver, format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => {
            let doc = json!({
                "tool": "moe",
                "version": env!("CARGO_PKG_VERSION"),
                "command": report.command,
                "config": resolver.resolved(),
                "result": report.result,
            });
            let mut out = serde_json::to_vec_pretty(&doc)
                .map_err(|e| usage(format!("cannot serialize report: {e}")))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "# moe {} {}", env!("CARGO_PKG_VERSION"), report.command)?;
            for (k, v) in resolver.resolved() {
                writeln!(out, "# {k} = {v}")?;
            }
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&report.table.header)?;
            for row in &report.table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
            drop(w);
            Ok(out)
        }
    }
}

pub fn emit(bytes: &[u8], path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}
