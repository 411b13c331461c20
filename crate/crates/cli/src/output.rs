//! Atomic file output. Each file is written to a temporary sibling and
//! renamed into place, so readers never see a partial table.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::outcome::{Check, Failure, Table};

pub const MANIFEST: &str = "manifest.json";

fn io(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
    let target = dir.join(name);
    let mut tmp = tempfile::Builder::new().prefix(".tmp-").tempfile_in(dir).map_err(|e| io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io(&target, e))?;
    tmp.as_file().sync_all().map_err(|e| io(&target, e))?;
    tmp.persist(&target).map_err(|e| io(&target, e.error))?;
    Ok(target)
}

/// Renders every table first so a formatting error leaves no files behind.
pub fn write_tables(dir: &Path, tables: &[Table]) -> Result<Vec<String>, Failure> {
    let rendered = tables
        .iter()
        .map(|t| t.to_csv().map(|b| (format!("{}.csv", t.name), b)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| io(dir, e))?;
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut names = Vec::with_capacity(rendered.len());
    for (name, bytes) in rendered {
        write_atomic(dir, &name, &bytes)?;
        names.push(name);
    }
    Ok(names)
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub code: String,
    pub message: String,
}

/// The run record. `command` and `config` are enough to repeat the run.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a ExperimentConfig,
    pub status: &'static str,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub metrics: serde_json::Map<String, Value>,
    pub truncation: Value,
    pub timescale: Value,
    pub report: Value,
}

pub fn write_manifest(dir: &Path, manifest: &Manifest<'_>) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut bytes = serde_json::to_vec_pretty(manifest).map_err(|e| io(dir, e))?;
    bytes.push(b'\n');
    write_atomic(dir, MANIFEST, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::Cell;

    #[test]
    fn floats_keep_seventeen_digits() {
        let x = 0.1 + 0.2;
        let s = crate::outcome::format_float(x);
        assert_eq!(s, "3.0000000000000004e-1");
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn tables_land_atomically_with_trailer() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("demo", &["t", "state", "p"]);
        t.push(vec![Cell::Float(0.0), Cell::from(1usize), Cell::Float(0.5)]);
        t.trailer.push(("max_deviation".into(), 0.25));
        let names = write_tables(dir.path(), &[t]).unwrap();
        assert_eq!(names, vec!["demo.csv"]);
        let text = std::fs::read_to_string(dir.path().join("demo.csv")).unwrap();
        assert_eq!(
            text,
            "t,state,p\n0.0000000000000000e0,1,5.0000000000000000e-1\n# max_deviation,2.5000000000000000e-1\n"
        );
        let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 1);
    }
}
