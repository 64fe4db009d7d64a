//! Experiment result tables with deterministic CSV and JSON emission.
//!
//! CSV layout: a `#schema=1` comment line, a header row, then data rows.
//! Floats are emitted with 9 significant digits; emit-parse-emit is
//! byte-stable.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::OutputFormat;

/// One table cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Str(String),
}

impl Cell {
    pub fn str(s: impl Into<String>) -> Self {
        Cell::Str(s.into())
    }

    fn emit(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.8e}"),
            Cell::Str(s) => {
                debug_assert!(!s.contains(',') && !s.contains('\n'));
                s.clone()
            }
        }
    }

    fn parse(text: &str) -> Cell {
        if let Ok(v) = text.parse::<i64>() {
            return Cell::Int(v);
        }
        if let Ok(v) = text.parse::<f64>() {
            return Cell::Float(v);
        }
        Cell::Str(text.to_string())
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Cell::Int(a), Cell::Int(b)) => a == b,
            // bit comparison keeps NaN == NaN and avoids epsilon choices
            (Cell::Float(a), Cell::Float(b)) => a.to_bits() == b.to_bits(),
            (Cell::Str(a), Cell::Str(b)) => a == b,
            _ => false,
        }
    }
}

/// Column-labelled result rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("#schema=1\n");
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&cell.emit());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("CSV has no header row".into()))?;
        let columns: Vec<String> = header.split(',').map(|c| c.to_string()).collect();
        let mut rows = Vec::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let row: Vec<Cell> = line.split(',').map(Cell::parse).collect();
            if row.len() != columns.len() {
                return Err(Error::InvalidInput(format!(
                    "CSV row has {} cells, expected {}",
                    row.len(),
                    columns.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn to_json(&self) -> String {
        use serde_json::{json, Number, Value};
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|cell| match cell {
                            Cell::Int(v) => Value::Number((*v).into()),
                            // NaN / infinities have no JSON form; emit null
                            Cell::Float(v) => {
                                Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null)
                            }
                            Cell::Str(s) => Value::String(s.clone()),
                        })
                        .collect(),
                )
            })
            .collect();
        let doc = json!({
            "schema": 1,
            "columns": self.columns,
            "rows": rows,
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("JSON serialization");
        out.push('\n');
        out
    }

    pub fn emit(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        fs::write(path, self.emit(format))?;
        Ok(())
    }

    /// Short human-readable summary for CLI logs.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{} rows x {} columns", self.rows.len(), self.columns.len());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new(&["snr_db", "method", "mean_se"]);
        t.push_row(vec![
            Cell::Float(0.0),
            Cell::str("full_digital"),
            Cell::Float(31.4159265358979),
        ]);
        t.push_row(vec![
            Cell::Float(-10.0),
            Cell::str("phase_matching"),
            Cell::Float(f64::NAN),
        ]);
        t.push_row(vec![Cell::Int(5), Cell::str("x"), Cell::Float(1.0)]);
        t
    }

    #[test]
    fn csv_has_schema_line_and_nine_significant_digits() {
        let csv = sample().to_csv();
        assert!(csv.starts_with("#schema=1\n"));
        assert!(csv.contains("3.14159265e1"));
    }

    #[test]
    fn csv_emit_parse_emit_is_byte_stable() {
        let t = sample();
        let first = t.to_csv();
        let parsed = ResultTable::from_csv(&first).unwrap();
        let second = parsed.to_csv();
        assert_eq!(first, second);
        // and the parsed form is a fixed point of parse(emit(..))
        let reparsed = ResultTable::from_csv(&second).unwrap();
        assert_eq!(parsed, reparsed);
    }

    #[test]
    fn json_replaces_nan_with_null() {
        let json = sample().to_json();
        assert!(json.contains("null"));
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["schema"], 1);
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let text = "#schema=1\na,b\n1,2\n3\n";
        assert!(ResultTable::from_csv(text).is_err());
    }
}
