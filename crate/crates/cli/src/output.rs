//! Output records and their JSON-lines / CSV encodings.
//!
//! JSON is canonical: object keys sorted, floats printed with 17 significant
//! digits in exponent form, integers verbatim. Parsing a line and writing it
//! back reproduces the same bytes.

use std::collections::BTreeSet;
use std::io::Write;

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub command: String,
    pub params: Map<String, Value>,
    pub result: Value,
    pub seed: Option<u64>,
}

impl OutputRecord {
    pub fn new(command: &str, params: Value, result: Value) -> Self {
        let params = match params {
            Value::Object(m) => m,
            Value::Null => Map::new(),
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        Self { command: command.to_string(), params, result, seed: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("params".into(), Value::Object(self.params.clone()));
        m.insert("result".into(), self.result.clone());
        if let Some(s) = self.seed {
            m.insert("seed".into(), Value::from(s));
        }
        Value::Object(m)
    }
}

/// Float as JSON: finite values with 17 significant digits, else `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_scalar(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                out.push_str(&format_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string encodes")),
        _ => unreachable!("not a scalar"),
    }
}

/// Canonical single-line JSON encoding.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_json(v, &mut out);
    out
}

fn write_json(v: &Value, out: &mut String) {
    match v {
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json(item, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let keys: BTreeSet<&String> = m.keys().collect();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key encodes"));
                out.push(':');
                write_json(&m[k], out);
            }
            out.push('}');
        }
        scalar => write_scalar(scalar, out),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), child, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        scalar => {
            let mut s = String::new();
            write_scalar(scalar, &mut s);
            out.push((prefix.to_string(), s));
        }
    }
}

/// Writes records as JSON lines or as CSV with a header row covering the
/// union of all flattened keys.
pub fn write_records<W: Write>(records: &[OutputRecord], format: Format, mut w: W) -> std::io::Result<()> {
    match format {
        Format::Json => {
            for r in records {
                writeln!(w, "{}", canonical_json(&r.to_value()))?;
            }
            Ok(())
        }
        Format::Csv => {
            let rows: Vec<Vec<(String, String)>> = records
                .iter()
                .map(|r| {
                    let mut cells = Vec::new();
                    flatten("", &r.to_value(), &mut cells);
                    cells
                })
                .collect();
            let columns: BTreeSet<&String> = rows.iter().flatten().map(|(k, _)| k).collect();
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(&columns)?;
            for row in &rows {
                let cells = columns.iter().map(|c| {
                    row.iter().find(|(k, _)| k == *c).map_or("", |(_, v)| v.as_str())
                });
                csv.write_record(cells)?;
            }
            csv.flush()
        }
    }
}
