//! Deterministic CSV and JSON-lines writers.
//!
//! Floats in CSV are written with 17 significant digits in scientific
//! notation; missing values are empty cells and non-finite values are
//! `inf`, `-inf` or `nan`. JSON objects are emitted with sorted keys.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::config::Format;
use crate::error::CliError;

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// JSON number, or `null` when not finite.
pub fn json_num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn json_opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, json_num)
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Collects artifacts for one run and writes them into the output directory.
#[derive(Debug)]
pub struct ArtifactSink {
    dir: PathBuf,
    formats: Vec<Format>,
    written: Vec<String>,
}

impl ArtifactSink {
    pub fn new(dir: &Path, formats: &[Format]) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), formats: formats.to_vec(), written: Vec::new() })
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Always written, whatever the configured formats.
    pub fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.write(name, text)
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        if self.formats.contains(&Format::Csv) {
            self.write(name, &table.render())?;
        }
        Ok(())
    }

    pub fn jsonl(&mut self, name: &str, records: &[Value]) -> Result<(), CliError> {
        if self.formats.contains(&Format::Jsonl) {
            let mut text = String::new();
            for r in records {
                text.push_str(&serde_json::to_string(r).expect("JSON values always serialize"));
                text.push('\n');
            }
            self.write(name, &text)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_has_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(opt(None), "");
        assert_eq!(json_num(f64::NAN), Value::Null);
    }

    #[test]
    fn formatted_values_round_trip() {
        for x in [1.0 / 3.0, 6.02214076e23, -1e-300, 2f64.sqrt()] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
