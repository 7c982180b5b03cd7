//! Result tables and their CSV / JSON rendering.

use crate::failure::Failure;
use serde_json::{Map, Value};
use std::fmt::Write as _;
use std::time::Instant;

/// Significant digits written for floating-point CSV cells.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Rows of one command run, with a fixed column list.
#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Additional JSON-only details.
    pub extra: Map<String, Value>,
    /// Milliseconds spent producing each row, measured since the previous row.
    times: Vec<f64>,
    clock: Instant,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        let mut all = vec!["command"];
        all.extend_from_slice(columns);
        Self {
            command,
            columns: all,
            rows: Vec::new(),
            extra: Map::new(),
            times: Vec::new(),
            clock: Instant::now(),
        }
    }

    /// Appends a row; `cells` excludes the leading command column.
    pub fn push(&mut self, cells: Vec<Cell>) -> Result<(), Failure> {
        if cells.len() + 1 != self.columns.len() {
            return Err(Failure::invariant(format!(
                "{} cells for {} columns",
                cells.len() + 1,
                self.columns.len()
            )));
        }
        for (cell, column) in cells.iter().zip(&self.columns[1..]) {
            if let Cell::Float(v) = cell {
                if !v.is_finite() {
                    return Err(Failure::invariant(format!(
                        "column {column} is not finite: {v}"
                    )));
                }
            }
        }
        let mut row = vec![Cell::Text(self.command.to_string())];
        row.extend(cells);
        self.rows.push(row);
        self.times.push(self.clock.elapsed().as_secs_f64() * 1e3);
        self.clock = Instant::now();
        Ok(())
    }

    pub fn append(&mut self, other: Table) {
        self.rows.extend(other.rows);
        self.times.extend(other.times);
    }

    /// Appends the `wall_time_ms` column.
    pub fn with_timing(mut self) -> Self {
        let times: Vec<Cell> = self.times.iter().map(|&t| Cell::Float(t)).collect();
        self.add_column("wall_time_ms", times);
        self
    }

    /// Adds a trailing column to every row.
    pub fn add_column(&mut self, name: &'static str, values: impl IntoIterator<Item = Cell>) {
        self.columns.push(name);
        for (row, v) in self.rows.iter_mut().zip(values) {
            row.push(v);
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(format_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), cell_json(v)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("command".into(), Value::from(self.command));
        doc.insert("rows".into(), Value::Array(rows));
        for (k, v) in &self.extra {
            doc.insert(k.clone(), v.clone());
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(doc)).unwrap_or_default();
        text.push('\n');
        text
    }
}

fn cell_json(cell: &Cell) -> Value {
    match cell {
        Cell::Int(v) => Value::from(*v),
        Cell::Float(v) => Value::from(*v),
        Cell::Text(s) => Value::from(s.as_str()),
    }
}

fn format_cell(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format_float(*v),
        Cell::Text(s) => s.clone(),
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Twelve significant digits, plain notation for moderate exponents and
/// scientific notation otherwise, trailing zeros removed.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-5..15).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{v:.decimals$}")).to_string()
    } else {
        let mut out = String::new();
        let _ = write!(out, "{}e{}", trim_fraction(mantissa), exp);
        out
    }
}
