//! CSV/JSON output with a resolved-config metadata header. CSV floats carry
//! 17 significant digits so files round-trip exactly; outputs are built in
//! memory so repeated runs with the same config are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use lorenz5::{Error, Result};
use serde_json::{json, Value};

pub const ARTIFACT: &str = "lorenz5";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("format '{other}' must be csv or json"))),
        }
    }
}

/// 17 significant digits; exact round-trip for f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Ordered resolved-config metadata embedded in every output.
#[derive(Debug, Clone, Default)]
pub struct Meta {
    entries: Vec<(String, String)>,
}

impl Meta {
    pub fn new(command: &str) -> Self {
        let mut m = Meta::default();
        m.push("artifact", ARTIFACT);
        m.push("version", VERSION);
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.entries.push((key.to_string(), fmt_f64(value)));
    }

    fn csv_header(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out
    }

    fn json_object(&self) -> Value {
        let mut map = serde_json::Map::new();
        for (k, v) in &self.entries {
            map.insert(k.clone(), Value::String(v.clone()));
        }
        Value::Object(map)
    }
}

/// A CSV table (header + rows of already-formatted cells) with optional
/// trailing comment lines (e.g. a zeros block or a failure marker).
#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub trailers: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            trailers: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn push_trailer(&mut self, line: impl Into<String>) {
        self.trailers.push(line.into());
    }

    fn to_csv(&self, meta: &Meta) -> String {
        let mut out = meta.csv_header();
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        for t in &self.trailers {
            let _ = writeln!(out, "# {t}");
        }
        out
    }
}

/// Renders either the CSV table or a JSON mirror {"meta": ..., "data": ...}.
pub fn render(format: Format, meta: &Meta, table: &Table, json_data: Value) -> String {
    match format {
        Format::Csv => table.to_csv(meta),
        Format::Json => {
            let doc = json!({ "meta": meta.json_object(), "data": json_data });
            let mut s = serde_json::to_string_pretty(&doc).expect("json serialization");
            s.push('\n');
            s
        }
    }
}

/// Writes to the path, or stdout when none.
pub fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
