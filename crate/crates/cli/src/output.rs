//! Artifact rendering. Every artifact starts with the same metadata: tool
//! version, the command configuration and the tolerances in force. CSV files
//! carry it as `#` comment lines, JSON documents as a `meta` object.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use polyring::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, Format};
use crate::error::CliError;

pub const TOOL: &str = "polyring";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        Cx { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, headers: &[&str]) -> Self {
        Table { name: name.into(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub result: Value,
    pub tables: Vec<Table>,
    pub tolerances: BTreeMap<&'static str, f64>,
    /// Scalar highlights repeated as comments above CSV tables.
    pub notes: Vec<(String, String)>,
}

pub struct Meta<'a> {
    pub command: &'a Command,
    pub tolerances: &'a BTreeMap<&'static str, f64>,
}

impl Meta<'_> {
    pub fn to_value(&self) -> Result<Value, CliError> {
        Ok(json!({
            "tool": TOOL,
            "version": VERSION,
            "config": serde_json::to_value(self.command)?,
            "tolerances": self.tolerances,
        }))
    }

    pub fn csv_header(&self, extra: &[(String, String)]) -> Result<String, CliError> {
        let mut out = format!("# tool: {TOOL} {VERSION}\n");
        out += &format!("# config: {}\n", serde_json::to_string(self.command)?);
        out += &format!("# tolerances: {}\n", serde_json::to_string(self.tolerances)?);
        for (k, v) in extra {
            out += &format!("# {k}: {v}\n");
        }
        Ok(out)
    }
}

pub fn render_csv(meta: &Meta, notes: &[(String, String)], table: &Table) -> Result<String, CliError> {
    let mut out = meta.csv_header(notes)?.into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&table.headers)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| CliError::Io { path: "<buffer>".into(), source: e })?;
    }
    Ok(String::from_utf8(out).expect("csv output is utf-8"))
}

pub fn render_json(meta: &Meta, result: &Value) -> Result<String, CliError> {
    let doc = json!({ "meta": meta.to_value()?, "result": result });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Prints the primary artifact to stdout and, given a directory, writes
/// `result.json` plus one CSV per table there.
pub fn emit(command: &Command, report: &Report, format: Format, out_dir: Option<&Path>) -> Result<(), CliError> {
    let meta = Meta { command, tolerances: &report.tolerances };
    let text = match (format, report.tables.first()) {
        (Format::Csv, Some(table)) => render_csv(&meta, &report.notes, table)?,
        _ => render_json(&meta, &report.result)?,
    };
    std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))?;

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        write_file(&dir.join("result.json"), &render_json(&meta, &report.result)?)?;
        for table in &report.tables {
            write_file(&dir.join(format!("{}.csv", table.name)), &render_csv(&meta, &report.notes, table)?)?;
        }
    }
    Ok(())
}

/// Shortest round-trip representation, in exponent form outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
