//! Deterministic JSON and CSV output.
//!
//! Floats are written with 17 significant digits in exponent form, complex
//! numbers as `[re, im]`, and non-finite values as `null`.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::error::Error;

/// Compact JSON with every `f64` written as `{:.16e}`.
#[derive(Debug, Default, Clone, Copy)]
pub struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// `{:.16e}`, or `nan`/`inf` spelled out for CSV.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// The output document of every JSON-producing command.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub kind: String,
    pub params: Value,
    pub result: Value,
    pub diagnostics: Value,
}

impl Envelope {
    pub fn new(kind: impl Into<String>, params: Value, result: Value, diagnostics: Value) -> Self {
        Self {
            kind: kind.into(),
            params,
            result,
            diagnostics,
        }
    }
}

/// Structured error written to stderr.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorDoc {
    pub error: ErrorBody,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

impl ErrorDoc {
    pub fn new(kind: impl Into<String>, message: impl Into<String>, exit_code: i32) -> Self {
        Self {
            error: ErrorBody {
                kind: kind.into(),
                message: message.into(),
            },
            exit_code,
        }
    }

    pub fn from_error(e: &Error, exit_code: i32) -> Self {
        Self::new(e.tag(), e.to_string(), exit_code)
    }
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// Header plus rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
    }
}
