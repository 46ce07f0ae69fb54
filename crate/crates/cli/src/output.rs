//! Versioned CSV and JSON serialization of command results.

use serde::Serialize;
use serde_json::Value;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::config::Resolved;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// A command's primary result: a table for CSV and a structured document
/// for JSON.
#[derive(Debug, Clone)]
pub struct Output {
    pub schema: &'static str,
    pub version: u32,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `#key=value` header lines.
    pub meta: Vec<(String, String)>,
    pub json: Value,
}

impl Output {
    pub fn new(schema: &'static str, columns: Vec<&'static str>, json: impl Serialize) -> Self {
        Self {
            schema,
            version: 1,
            columns,
            rows: Vec::new(),
            meta: Vec::new(),
            json: serde_json::to_value(json).expect("result serializes"),
        }
    }

    pub fn render(&self, format: Format, resolved: &Resolved) -> String {
        match format {
            Format::Csv => self.to_csv(&resolved.sha256()),
            Format::Json => self.to_json(resolved),
        }
    }

    pub fn to_csv(&self, config_sha256: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "#schema={}:{}", self.schema, self.version);
        let _ = writeln!(s, "#config_sha256={config_sha256}");
        for (k, v) in &self.meta {
            let _ = writeln!(s, "#{k}={v}");
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(csv_field).collect();
            s.push_str(&fields.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self, resolved: &Resolved) -> String {
        let doc = serde_json::json!({
            "schema": format!("{}:{}", self.schema, self.version),
            "config_sha256": resolved.sha256(),
            "config": resolved.config,
            "result": self.json,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
        s.push('\n');
        s
    }
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Num(v) => sig10(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(b) => if *b { "1" } else { "0" }.to_string(),
        Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
        Cell::Text(t) => t.clone(),
        Cell::Empty => String::new(),
    }
}

/// Ten significant digits, fixed notation for exponents in `[−5, 10)` and
/// scientific otherwise, trailing zeros removed.
pub fn sig10(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Resource(format!("cannot write to stdout: {e}")))
        }
    }
}

/// Comma-separated list of numbers.
pub fn parse_list(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--{name}: `{s}` is not a number")))
        })
        .collect()
}
