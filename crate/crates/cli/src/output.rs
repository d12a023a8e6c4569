//! Tables written as CSV or JSON.
//!
//! Floats are printed in shortest round-trip form, so identical inputs give
//! byte-identical files. CSV renders an infinite extended-real value as
//! `inf`; JSON renders it as `null` next to `"infinite": true`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    /// Value in `ℝ ∪ {+∞}`.
    Extended(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Self::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Self::Empty, Self::Float)
    }
}

fn float_text(v: f64) -> String {
    format!("{v:?}")
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Self::Int(v) => v.to_string(),
            Self::Float(v) | Self::Extended(v) => float_text(*v),
            Self::Text(s) => s.clone(),
            Self::Bool(b) => b.to_string(),
            Self::Empty => String::new(),
        }
    }

    fn json_value(&self) -> Value {
        match self {
            Self::Int(v) => Value::from(*v),
            Self::Float(v) | Self::Extended(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Self::Text(s) => Value::from(s.as_str()),
            Self::Bool(b) => Value::from(*b),
            Self::Empty => Value::Null,
        }
    }
}

/// Named table with a fixed column list.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self { name: name.into(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    fn write_csv(&self, out: impl Write) -> std::result::Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_text))?;
        }
        w.flush()?;
        Ok(())
    }

    fn json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    obj.insert((*col).to_string(), cell.json_value());
                    if let Cell::Extended(v) = cell {
                        obj.insert("infinite".into(), Value::from(v.is_infinite()));
                    }
                }
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }

    /// Writes `<dir>/<name>.<ext>` and returns its path.
    pub fn write(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        let path = dir.join(format!("{}.{}", self.name, format.extension()));
        let io = |source| CliError::Io { path: path.clone(), source };
        let mut out = BufWriter::new(File::create(&path).map_err(io)?);
        match format {
            Format::Csv => {
                self.write_csv(&mut out).map_err(|e| CliError::Output(format!("writing {}: {e}", path.display())))?
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, &self.json())
                    .map_err(|e| CliError::Output(format!("writing {}: {e}", path.display())))?;
                out.write_all(b"\n").map_err(io)?;
            }
        }
        out.flush().map_err(io)?;
        Ok(path)
    }
}
