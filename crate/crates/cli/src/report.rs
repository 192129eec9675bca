use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use passivize::CMatrix;

pub const TIME: &str = "1/ω";
pub const ENERGY: &str = "energy";
pub const POWER: &str = "energy·ω";
pub const NONE: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "upper-bound")]
    UpperBound,
    #[serde(rename = "qsl")]
    Qsl,
    #[serde(rename = "numerical-oracle")]
    NumericalOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug)]
pub struct UnsupportedFormat(pub String);

impl std::str::FromStr for Format {
    type Err = UnsupportedFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            other => Err(UnsupportedFormat(format!("unsupported format {other:?} (json, text or csv)"))),
        }
    }
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(round12(x)).map_or(Value::Null, Value::Number)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn matrix(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| complex(m[(r, c)])).collect()))
            .collect(),
    )
}

/// A table for CSV output: header and rows of already formatted cells.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug)]
pub struct Report {
    pub command: String,
    pub input: Value,
    results: Map<String, Value>,
    pub warnings: Vec<String>,
    pub table: Option<Table>,
}

impl Report {
    pub fn new(command: &str, input: Value) -> Self {
        Self {
            command: command.to_string(),
            input,
            results: Map::new(),
            warnings: Vec::new(),
            table: None,
        }
    }

    pub fn add(&mut self, name: &str, value: Value, unit: &str, provenance: Provenance) {
        self.results.insert(
            name.to_string(),
            json!({ "value": value, "unit": unit, "provenance": provenance }),
        );
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "input": self.input,
            "results": self.results,
            "warnings": self.warnings,
        })
    }

    pub fn emit(&self, format: Format) -> Result<String, UnsupportedFormat> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let table = self.table.as_ref().ok_or_else(|| {
                    UnsupportedFormat(format!("command {:?} has no tabular output; use json or text", self.command))
                })?;
                let mut s = table.header.join(",");
                s.push('\n');
                for row in &table.rows {
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
                Ok(s)
            }
            Format::Text => {
                let mut s = format!("{}\n", self.command);
                for (name, q) in &self.results {
                    let value = match &q["value"] {
                        Value::String(text) => text.clone(),
                        other => other.to_string(),
                    };
                    let provenance = q["provenance"].as_str().unwrap_or("");
                    s.push_str(&format!("  {name} = {value} [{}] ({provenance})\n", q["unit"].as_str().unwrap_or("")));
                }
                for w in &self.warnings {
                    s.push_str(&format!("  warning: {w}\n"));
                }
                Ok(s)
            }
        }
    }
}
