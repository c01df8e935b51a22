//! Output envelope and its three renderings.
//!
//! Floating-point numbers are always written with 17 significant digits
//! (`{:.16e}`), which round-trips every `f64`. Non-finite values become
//! `null` in JSON and an empty cell in CSV.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputEnvelope {
    pub command: String,
    pub format_version: u32,
    pub inputs: Value,
    pub result: Value,
}

impl OutputEnvelope {
    pub fn new(command: &str, inputs: impl Serialize, result: impl Serialize) -> Self {
        OutputEnvelope {
            command: command.to_string(),
            format_version: FORMAT_VERSION,
            inputs: serde_json::to_value(inputs).expect("inputs serialize"),
            result: serde_json::to_value(result).expect("result serialize"),
        }
    }

    fn as_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("format_version".into(), Value::from(self.format_version));
        m.insert("inputs".into(), self.inputs.clone());
        m.insert("result".into(), self.result.clone());
        Value::Object(m)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut out = String::new();
                write_json(&mut out, &self.as_value());
                out.push('\n');
                out
            }
            Format::Csv => {
                let mut out = String::from("key,value\n");
                for (k, v) in flatten(&self.as_value()) {
                    let _ = writeln!(out, "{},{}", csv_cell(&k), csv_cell(&v));
                }
                out
            }
            Format::Text => {
                let rows = flatten(&self.as_value());
                let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                let mut out = String::new();
                for (k, v) in rows {
                    let _ = writeln!(out, "{k:<width$}  {v}");
                }
                out
            }
        }
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        fmt_f64(n.as_f64().unwrap_or(f64::NAN))
    } else {
        n.to_string()
    }
}

fn write_json(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&fmt_number(n)),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_json(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (k, (key, item)) in map.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(key.clone()).to_string());
                out.push(':');
                write_json(out, item);
            }
            out.push('}');
        }
    }
}

fn flatten(v: &Value) -> Vec<(String, String)> {
    fn go(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(map) => {
                for (k, item) in map {
                    go(&key(k), item, out);
                }
            }
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    go(&key(&i.to_string()), item, out);
                }
            }
            Value::Null => out.push((prefix.to_string(), String::new())),
            Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
            Value::Number(n) => out.push((prefix.to_string(), fmt_number(n))),
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
        }
    }
    let mut out = Vec::new();
    go("", v, &mut out);
    out
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A header row plus rows of numbers, for sweep outputs.
pub fn csv_table(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|&x| if x.is_finite() { fmt_f64(x) } else { String::new() })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
