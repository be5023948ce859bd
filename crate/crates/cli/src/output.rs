//! Deterministic output: every float is rendered at 12 significant digits
//! (trailing zeros trimmed), so repeated runs diff byte-for-byte.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use serde_json::{Map, Value};

/// `%.12g`-style rendering: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_fixed(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, exponent) = s.split_once('e').expect("scientific format");
        format!("{}e{exponent}", trim_fixed(mantissa.to_string()))
    }
}

fn trim_fixed(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// JSON value carrying a float rounded to the same 12 significant digits;
/// infinities become strings since JSON has no representation for them.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        fmt_sig(x)
            .parse::<f64>()
            .map(|v| serde_json::json!(v))
            .unwrap_or(Value::Null)
    } else {
        Value::String(fmt_sig(x))
    }
}

pub fn json_array(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| json_num(x)).collect())
}

/// Report assembled as ordered key/value pairs, rendered either as
/// `key=value` lines (csv mode) or a flat JSON object.
pub struct Report {
    fields: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self { fields: Vec::new() }
    }

    pub fn num(mut self, key: &str, x: f64) -> Self {
        self.fields.push((key.into(), json_num(x)));
        self
    }

    pub fn int(mut self, key: &str, n: u64) -> Self {
        self.fields.push((key.into(), serde_json::json!(n)));
        self
    }

    pub fn flag(mut self, key: &str, b: bool) -> Self {
        self.fields.push((key.into(), serde_json::json!(b)));
        self
    }

    pub fn text(mut self, key: &str, s: &str) -> Self {
        self.fields.push((key.into(), Value::String(s.into())));
        self
    }

    pub fn value(mut self, key: &str, v: Value) -> Self {
        self.fields.push((key.into(), v));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                for (k, v) in &self.fields {
                    let rendered = match v {
                        Value::String(s) => s.clone(),
                        Value::Number(n) => fmt_sig(n.as_f64().unwrap_or(f64::NAN)),
                        Value::Bool(b) => b.to_string(),
                        Value::Null => "nan".into(),
                        other => other.to_string(),
                    };
                    out.push_str(&format!("{k}={rendered}\n"));
                }
                out
            }
            Format::Json => {
                let mut map = Map::new();
                for (k, v) in &self.fields {
                    map.insert(k.clone(), v.clone());
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("valid JSON");
                s.push('\n');
                s
            }
        }
    }
}

/// CSV table with a fixed header.
pub struct Table {
    header: String,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &str) -> Self {
        Self {
            header: header.into(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<f64>) {
        self.rows.push(cells);
    }

    pub fn render_csv(&self) -> String {
        let mut out = format!("{}\n", self.header);
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_sig(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Columns as arrays in a flat JSON object keyed by the header names.
    pub fn render_json(&self) -> String {
        let mut map = Map::new();
        for (i, name) in self.header.split(',').enumerate() {
            let column: Vec<f64> = self.rows.iter().map(|r| r[i]).collect();
            map.insert(name.trim().into(), json_array(&column));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("valid JSON");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Writes to `--out` when given, stdout otherwise.
pub fn emit(out: &Option<PathBuf>, payload: &str) -> io::Result<()> {
    match out {
        Some(path) => File::create(path)?.write_all(payload.as_bytes()),
        None => io::stdout().write_all(payload.as_bytes()),
    }
}
