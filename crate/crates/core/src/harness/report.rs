//! Report tables with bit-reproducible rendering: floats are printed with 17
//! significant digits, rows are emitted in a fixed order, and every row
//! carries the fingerprint of the config that produced it.

use serde_json::{json, Map, Value};

use super::config::ExperimentKind;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub config_hash: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Map<String, Value>,
    pub passed: Option<bool>,
}

impl Report {
    pub fn new(experiment: ExperimentKind, config_hash: String, columns: Vec<&'static str>) -> Self {
        Report {
            experiment,
            config_hash,
            columns,
            rows: Vec::new(),
            summary: Map::new(),
            passed: None,
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len(), "row width mismatch");
        self.rows.push(cells);
    }

    pub fn note(&mut self, key: &str, value: Value) {
        self.summary.insert(key.to_string(), value);
    }

    pub fn note_f64(&mut self, key: &str, value: f64) {
        self.note(key, json!(fcell(value)));
    }

    /// Header row always present; `config_hash` is the first column of every
    /// data row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("config_hash");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&self.config_hash);
            for cell in row {
                debug_assert!(!cell.contains(','), "cells must be comma-free");
                out.push(',');
                out.push_str(cell);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "experiment": self.experiment.as_str(),
            "config_hash": self.config_hash,
            "columns": self.columns,
            "rows": self.rows,
            "summary": Value::Object(self.summary.clone()),
            "passed": self.passed,
        })
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json())
                    .expect("report serialization cannot fail");
                s.push('\n');
                s
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

/// 17 significant digits; enough to round-trip any f64.
pub fn fcell(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn icell(x: usize) -> String {
    x.to_string()
}

pub fn bcell(x: bool) -> String {
    if x { "1".to_string() } else { "0".to_string() }
}
