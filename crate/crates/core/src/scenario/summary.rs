use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ScenarioKind;
use crate::error::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.json";

/// Decimal places kept for headline numbers.
pub const HEADLINE_DECIMALS: i32 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub kind: ScenarioKind,
    pub headline: BTreeMap<String, Value>,
    /// Output files relative to the summary's directory.
    pub files: Vec<String>,
    pub engine_version: String,
    pub config: Value,
}

impl ResultSummary {
    pub fn new(kind: ScenarioKind, config: Value) -> Self {
        ResultSummary {
            kind,
            headline: BTreeMap::new(),
            files: Vec::new(),
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
        }
    }

    pub fn set_number(&mut self, key: impl Into<String>, v: f64) {
        self.headline.insert(key.into(), round_headline(v));
    }

    pub fn set(&mut self, key: impl Into<String>, v: impl Into<Value>) {
        self.headline.insert(key.into(), v.into());
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.headline.get(key).and_then(Value::as_f64)
    }
}

/// Rounds to [`HEADLINE_DECIMALS`]; non-finite values become null.
pub fn round_headline(v: f64) -> Value {
    let scale = 10f64.powi(HEADLINE_DECIMALS);
    let r = (v * scale).round() / scale;
    // avoid "-0.0" in the output
    let r = if r == 0.0 { 0.0 } else { r };
    serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
}

pub(crate) fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable value");
    out.push(b'\n');
    out
}

/// Writes the summary as JSON after checking that every manifest entry
/// exists next to it and is nonempty.
pub fn emit_summary(summary: &ResultSummary, path: &Path) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new(""));
    for name in &summary.files {
        let file = dir.join(name);
        match std::fs::metadata(&file) {
            Ok(m) if m.is_file() && m.len() > 0 => {}
            Ok(_) => {
                return Err(Error::Integrity(format!("{} is empty or not a file", file.display())));
            }
            Err(_) => {
                return Err(Error::Integrity(format!("{} is listed but missing", file.display())));
            }
        }
    }
    std::fs::write(path, to_json_bytes(summary)).map_err(|e| Error::io(path, e))
}
