use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Output of one command. `verified` is false when an identity failed
/// beyond its bound; that maps to exit code 2.
pub struct Report {
    pub json: Value,
    pub table: Option<Table>,
    pub verified: bool,
    pub default_format: Format,
    /// Plain-text rendering used when no `--format` is given.
    pub text: Option<String>,
}

impl Report {
    pub fn json<T: Serialize>(value: &T, verified: bool) -> CliResult<Report> {
        Ok(Report { json: serde_json::to_value(value)?, table: None, verified, default_format: Format::Json, text: None })
    }

    pub fn with_table(mut self, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Report {
        self.table = Some(Table { header, rows });
        self
    }

    pub fn prefer_csv(mut self) -> Report {
        self.default_format = Format::Csv;
        self
    }

    pub fn with_text(mut self, text: String) -> Report {
        self.text = Some(text);
        self
    }

    pub fn render(&self, format: Option<Format>) -> CliResult<String> {
        if let (None, Some(t)) = (format, &self.text) {
            return Ok(t.clone());
        }
        match format.unwrap_or(self.default_format) {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("csv output is only available for tabular commands".into()))?;
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&table.header)?;
                for row in &table.rows {
                    w.write_record(row)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
                Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
            }
        }
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Shortest round-trip form of a float for CSV cells; exponent notation
/// outside [1e-4, 1e16).
pub fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e16).contains(&x.abs()) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
