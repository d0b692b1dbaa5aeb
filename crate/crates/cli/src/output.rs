//! Run manifests and CSV/JSON rendering.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Bumped whenever CSV columns or JSON keys change.
pub const SCHEMA: &str = "symwalk-output/1";

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub command: String,
    pub params: Map<String, Value>,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub precision: usize,
    pub threads: usize,
    pub wall_time_secs: f64,
}

impl RunManifest {
    pub fn new(command: &str, params: Map<String, Value>, seed: Option<u64>, precision: usize) -> Self {
        RunManifest {
            schema: SCHEMA,
            command: command.to_string(),
            params,
            seed,
            version: symwalk::VERSION,
            precision,
            threads: rayon::current_num_threads(),
            wall_time_secs: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_number(*v),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(v) => Value::from(*v),
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
        }
    }
}

/// Shortest round-trip decimal, switching to scientific notation below `1e-4`
/// and from `1e16` on.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let a = x.abs();
    if !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn objects(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect()))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// CSV: a `#`-prefixed manifest line, the header, then rows.
pub fn render_csv(manifest: &RunManifest, table: &Table) -> Result<String, CliError> {
    let mut out = format!("# manifest {}\n", serde_json::to_string(manifest)?);
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn render_json(manifest: &RunManifest, results: Vec<Value>, summary: Option<Value>) -> Result<String, CliError> {
    let mut top = Map::new();
    top.insert("manifest".into(), serde_json::to_value(manifest)?);
    top.insert("results".into(), Value::Array(results));
    if let Some(s) = summary {
        top.insert("summary".into(), s);
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(top))?;
    text.push('\n');
    Ok(text)
}

pub fn render_table(manifest: &RunManifest, table: &Table, format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => render_csv(manifest, table),
        Format::Json => render_json(manifest, table.objects(), None),
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
