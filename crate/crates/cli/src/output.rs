use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::CliError;

pub const SCHEMA: u32 = 1;

/// Provenance attached to every emitted file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub tool_version: String,
    pub timestamp: String,
    pub master_seed: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            master_seed: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.master_seed = Some(seed);
        self
    }
}

/// Shortest round-trip text for a float; exponent form only for very
/// small or large magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// A JSON document with the schema tag and manifest up front.
pub fn record(manifest: &RunManifest, body: Value) -> Value {
    let mut doc = json!({ "schema": SCHEMA, "manifest": manifest });
    if let (Some(map), Value::Object(extra)) = (doc.as_object_mut(), body) {
        map.extend(extra);
    }
    doc
}

pub fn write_csv(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes CSV to `path` with its manifest next to it, or to `out`.
pub fn emit_csv(
    path: Option<&Path>,
    out: &mut dyn Write,
    manifest: &RunManifest,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            write_csv(&mut f, header, rows)?;
            write_json_file(&sidecar_path(p), &record(manifest, json!({})))
        }
        None => write_csv(out, header, rows),
    }
}

pub fn write_json_file(path: &Path, doc: &Value) -> Result<(), CliError> {
    let mut f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::to_writer_pretty(&mut f, doc)?;
    writeln!(f)?;
    Ok(())
}

pub fn emit_json(path: Option<&Path>, out: &mut dyn Write, doc: &Value) -> Result<(), CliError> {
    match path {
        Some(p) => write_json_file(p, doc),
        None => {
            serde_json::to_writer_pretty(&mut *out, doc)?;
            writeln!(out)?;
            Ok(())
        }
    }
}
