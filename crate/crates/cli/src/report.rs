//! JSON and CSV emission. Every number is written with 17 significant
//! digits so that doubles round-trip exactly.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Number, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Scientific notation with 17 significant digits.
pub fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// A JSON number with 17 significant digits; `null` when not finite.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&fmt(x)).expect("valid JSON number"))
    } else {
        Value::Null
    }
}

pub fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn vector(v: &DVector<f64>) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn slice(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

/// Row-major nested arrays.
pub fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| slice(&m.row(i).iter().copied().collect::<Vec<_>>()))
            .collect(),
    )
}

/// Wraps a command result with the schema version, library version and the
/// effective configuration.
pub fn envelope(command: &str, cfg: &RunConfig, result: Value) -> Result<Value, CliError> {
    let config = serde_json::to_value(cfg).map_err(|e| CliError::Io(e.to_string()))?;
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("library_version".into(), json!(foliation_core::VERSION));
    m.insert("command".into(), json!(command));
    m.insert("config".into(), config);
    m.insert("result".into(), result);
    Ok(Value::Object(m))
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    let mut f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    writeln!(f, "{text}").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `prefix1, prefix2, …, prefixN`.
pub fn columns(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn cells(v: &DVector<f64>) -> Vec<String> {
    v.iter().map(|&x| fmt(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.12345679, 0.0] {
            let v = num(x);
            let back: f64 = serde_json::from_value::<f64>(v.clone()).unwrap();
            assert_eq!(back, x);
            assert_eq!(fmt(back), fmt(x));
        }
        assert_eq!(num(f64::NAN), Value::Null);
    }

    #[test]
    fn seventeen_significant_digits() {
        let s = serde_json::to_string(&num(0.1)).unwrap();
        assert_eq!(s, "1.0000000000000001e-1");
    }
}
