//! Result tables: CSV with unit-annotated headers, JSON arrays whose keys are
//! the same headers, and an aligned text summary.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::Format;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Empty => Value::Null,
        }
    }

    fn short(&self) -> String {
        match self {
            Cell::Num(v) if *v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) => format!("{v:.4e}"),
            Cell::Num(v) => format!("{v:.6}").trim_end_matches('0').trim_end_matches('.').to_string(),
            other => other.csv(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

impl Column {
    pub const fn new(name: &'static str, unit: &'static str) -> Self {
        Self { name, unit }
    }

    pub fn header(&self) -> String {
        if self.unit.is_empty() {
            self.name.to_string()
        } else {
            format!("{} [{}]", self.name, self.unit)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

/// Provenance attached to every record.
#[derive(Debug, Clone, PartialEq)]
pub struct Meta {
    pub run_id: String,
    pub config_hash: String,
}

impl Meta {
    /// Hash of the canonical configuration text.
    pub fn for_config(canonical: &str) -> Self {
        let digest = Sha256::digest(canonical.as_bytes());
        let config_hash: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self {
            run_id: format!("run-{}", &config_hash[..12]),
            config_hash,
        }
    }
}

const META_COLUMNS: [&str; 3] = ["run_id", "config_hash", "tool_version"];

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn headers(&self) -> Vec<String> {
        self.columns.iter().map(Column::header).collect()
    }

    pub fn to_csv(&self, meta: &Meta) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = self.headers();
        header.extend(META_COLUMNS.iter().map(|s| s.to_string()));
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.iter().map(Cell::csv).collect();
            rec.extend([meta.run_id.clone(), meta.config_hash.clone(), TOOL_VERSION.to_string()]);
            w.write_record(&rec)?;
        }
        Ok(w.into_inner().context("flushing CSV")?)
    }

    pub fn to_json(&self, meta: &Meta) -> Result<Vec<u8>> {
        let headers = self.headers();
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (h, c) in headers.iter().zip(row) {
                    m.insert(h.clone(), c.json());
                }
                m.insert("run_id".into(), meta.run_id.clone().into());
                m.insert("config_hash".into(), meta.config_hash.clone().into());
                m.insert("tool_version".into(), TOOL_VERSION.into());
                Value::Object(m)
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&records)?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn render(&self, format: Format, meta: &Meta) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(meta),
            Format::Json => self.to_json(meta),
        }
    }

    /// Aligned plain-text table for terminals.
    pub fn summary(&self) -> String {
        let headers = self.headers();
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::short).collect()).collect();
        let widths: Vec<usize> = (0..headers.len())
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r[j].chars().count())
                    .chain([headers[j].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |items: &[String]| {
            items
                .iter()
                .zip(&widths)
                .map(|(s, &w)| format!("{s:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = line(&headers);
        out.push('\n');
        for r in &cells {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}
