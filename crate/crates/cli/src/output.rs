use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Scientific notation with 12 significant digits.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.11e}")
}

/// Round a float to 12 significant digits so the JSON text is stable.
fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    fmt_f(x).parse().unwrap_or(x)
}

/// Serialize with every non-integer number rounded to 12 significant digits.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    fn walk(v: Value) -> Value {
        match v {
            Value::Number(n) if n.is_f64() => {
                let x = round12(n.as_f64().unwrap_or(f64::NAN));
                serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
            }
            Value::Array(items) => Value::Array(items.into_iter().map(walk).collect()),
            Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, walk(v))).collect()),
            other => other,
        }
    }
    let v = walk(serde_json::to_value(value)?);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut csv = Self::default();
        csv.row(header.iter().map(|s| s.to_string()));
        csv
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn blank_line(&mut self) {
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Where results go: a file or stdout. Files written are remembered for the
/// manifest.
#[derive(Debug, Default)]
pub struct Sink {
    out: Option<PathBuf>,
    pub written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>) -> Self {
        Self { out, written: Vec::new() }
    }

    pub fn emit(&mut self, text: &str) -> Result<()> {
        match self.out.clone() {
            Some(path) => self.write_file(&path, text),
            None => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()?;
                Ok(())
            }
        }
    }

    pub fn write_file(&mut self, path: &Path, text: &str) -> Result<()> {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.to_path_buf());
        Ok(())
    }
}
