//! Tabular reports and their CSV / JSON encodings.
//!
//! Floats are written in scientific notation with 17 significant digits and
//! JSON objects have sorted keys, so equal reports encode to equal bytes.
//! Non-finite floats become empty CSV fields and JSON `null`.

use std::collections::BTreeMap;
use std::io::Write;

use serde_json::{Map, Number};

use crate::BenchError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

/// `{:.16e}`, i.e. 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Value {
    fn csv_field(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) if x.is_finite() => format_float(*x),
            Value::Float(_) => String::new(),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Value::Int(i) => serde_json::Value::from(*i),
            Value::Float(x) if x.is_finite() => {
                let n: Number = format_float(*x).parse().expect("formatted float is a JSON number");
                serde_json::Value::Number(n)
            }
            Value::Float(_) => serde_json::Value::Null,
            Value::Text(s) => serde_json::Value::String(s.clone()),
            Value::Bool(b) => serde_json::Value::Bool(*b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Rows under a fixed header, plus the run configuration and summary values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub command: String,
    pub config: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub summary: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self { command: command.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Float values of a column, `NaN` where absent.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(c) = self.column(name) else { return Vec::new() };
        self.rows
            .iter()
            .map(|r| match r[c] {
                Value::Float(x) => x,
                Value::Int(i) => i as f64,
                _ => f64::NAN,
            })
            .collect()
    }

    /// Header and rows only; the summary is recomputable from the rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), BenchError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::csv_field))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let object = |m: &BTreeMap<String, Value>| {
            serde_json::Value::Object(m.iter().map(|(k, v)| (k.clone(), v.json())).collect::<Map<_, _>>())
        };
        let rows = self
            .rows
            .iter()
            .map(|r| {
                serde_json::Value::Object(
                    self.columns.iter().cloned().zip(r.iter().map(Value::json)).collect::<Map<_, _>>(),
                )
            })
            .collect();
        let mut root = Map::new();
        root.insert("command".into(), self.command.clone().into());
        root.insert("config".into(), object(&self.config));
        root.insert("columns".into(), self.columns.clone().into());
        root.insert("rows".into(), serde_json::Value::Array(rows));
        root.insert("summary".into(), object(&self.summary));
        serde_json::Value::Object(root)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), BenchError> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> Result<(), BenchError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    /// Human-readable summary lines, `key = value`.
    pub fn summary_text(&self) -> String {
        self.summary.iter().map(|(k, v)| format!("{k} = {}\n", v.csv_field())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo", &["trial", "value", "label"]);
        r.config.insert("seed".into(), 7usize.into());
        r.push(vec![0usize.into(), 0.1.into(), "a".into()]);
        r.push(vec![1usize.into(), f64::NAN.into(), "b".into()]);
        r.summary.insert("zeta".into(), 1.0.into());
        r.summary.insert("alpha".into(), (1.0 / 3.0).into());
        r
    }

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(-2.5e-300), "-2.5000000000000000e-300");
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "trial,value,label\n0,1.0000000000000001e-1,a\n1,,b\n");
    }

    #[test]
    fn json_is_sorted_and_exact() {
        let mut buf = Vec::new();
        sample().write_json(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.find("\"alpha\"").unwrap() < text.find("\"zeta\"").unwrap());
        assert!(text.find("\"columns\"").unwrap() < text.find("\"rows\"").unwrap());
        assert!(text.contains("3.3333333333333331e-1"));
        assert!(text.contains("\"value\": null"));
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["rows"][0]["label"], "a");
    }

    #[test]
    fn float_columns() {
        let r = sample();
        let v = r.floats("value");
        assert_eq!(v[0], 0.1);
        assert!(v[1].is_nan());
        assert!(r.floats("missing").is_empty());
    }
}
