//! Byte-stable report serialization: JSON with sorted keys and floats
//! rounded to 12 significant digits, CSV with one row per record, or a
//! short text rendering.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::finite::ensure_finite;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// What a command produced.
pub struct Report {
    /// JSON document (an object, or an array of row objects).
    pub json: Value,
    /// CSV records; by default the JSON itself (or its elements).
    pub rows: Vec<Value>,
    /// Fixed CSV column order; otherwise sorted keys of the first row.
    pub columns: Option<Vec<&'static str>>,
    /// Plain rendering for `--format text`; pretty JSON when absent.
    pub text: Option<String>,
    /// 0 success, 1 a check or acceptance row failed.
    pub exit: i32,
}

impl Report {
    pub fn from_value(json: Value) -> Report {
        let rows = match &json {
            Value::Array(items) => items.clone(),
            other => vec![other.clone()],
        };
        Report {
            json,
            rows,
            columns: None,
            text: None,
            exit: 0,
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Report {
        self.text = Some(text.into());
        self
    }

    pub fn with_columns(mut self, columns: &[&'static str]) -> Report {
        self.columns = Some(columns.to_vec());
        self
    }

    pub fn with_exit(mut self, exit: i32) -> Report {
        self.exit = exit;
        self
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(render_json(&self.json, false)),
            Format::Text => Ok(match &self.text {
                Some(t) => format!("{t}\n"),
                None => render_json(&self.json, true),
            }),
            Format::Csv => render_csv(&self.rows, self.columns.as_deref()),
        }
    }
}

/// Serializes to a canonical JSON value, rejecting NaN and infinities.
pub fn to_json<T: Serialize>(value: &T) -> Result<Value> {
    ensure_finite(value)?;
    let v = serde_json::to_value(value)?;
    Ok(round_floats(v))
}

/// `v` rounded to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let f = round12(n.as_f64().expect("f64 number"));
            Value::Number(Number::from_f64(f).expect("finite after check"))
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        // serde_json's default map is ordered by key.
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

fn render_json(v: &Value, pretty: bool) -> String {
    let mut s = if pretty {
        serde_json::to_string_pretty(v).expect("value serializes")
    } else {
        serde_json::to_string(v).expect("value serializes")
    };
    s.push('\n');
    s
}

/// CSV cell: strings raw, scalars as their JSON text, null empty, nested
/// values as compact JSON.
fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Array(items)) if items.iter().all(Value::is_string) => items
            .iter()
            .filter_map(Value::as_str)
            .collect::<Vec<_>>()
            .join("; "),
        Some(other) => other.to_string(),
    }
}

fn render_csv(rows: &[Value], columns: Option<&[&str]>) -> Result<String> {
    let header: Vec<String> = match columns {
        Some(cols) => cols.iter().map(|c| c.to_string()).collect(),
        None => match rows.first() {
            Some(Value::Object(map)) => map.keys().cloned().collect(),
            Some(_) => vec!["value".into()],
            None => Vec::new(),
        },
    };
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    writer.write_record(&header)?;
    for row in rows {
        let record: Vec<String> = match row {
            Value::Object(map) => header.iter().map(|k| cell(map.get(k))).collect(),
            scalar => vec![cell(Some(scalar))],
        };
        writer.write_record(&record)?;
    }
    let bytes = writer.into_inner().context("flushing CSV")?;
    Ok(String::from_utf8(bytes)?)
}

/// Writes to `path`, or stdout when `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round12(std::f64::consts::LN_2), 0.693147180560);
        assert_eq!(round12(2.0), 2.0);
        assert_eq!(round12(-1.23456789012345e-7), -1.23456789012e-7);
    }

    #[test]
    fn json_is_sorted_and_rounded() {
        #[derive(Serialize)]
        struct R {
            zeta: f64,
            alpha: u32,
        }
        let r = Report::from_value(to_json(&R { zeta: 1.0 / 3.0, alpha: 1 }).unwrap());
        assert_eq!(r.render(Format::Json).unwrap(), "{\"alpha\":1,\"zeta\":0.333333333333}\n");
    }

    #[test]
    fn nan_is_rejected() {
        assert!(to_json(&json!({"a": 1})).is_ok());
        assert!(to_json(&vec![1.0, f64::NAN]).is_err());
        assert!(to_json(&Some(f64::INFINITY)).is_err());
    }

    #[test]
    fn csv_matches_json_fields() {
        let r = Report::from_value(json!([{"n": 1, "value": 0.5, "warnings": ["a", "b"]}, {"n": 2, "value": null, "warnings": []}]));
        assert_eq!(r.render(Format::Csv).unwrap(), "n,value,warnings\n1,0.5,a; b\n2,,\n");
    }
}
