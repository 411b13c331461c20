use std::fmt;

use serde::Serialize;
use serde_json::Value;

/// Why a run stopped short of exit code 0.
#[derive(Debug)]
pub enum Failure {
    /// Rejected input. Nothing is written.
    Validation(String),
    /// A numerical method failed on valid input. Only the manifest is written.
    Numerical(dephase_core::Error),
    /// Reading or writing files failed.
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) | Failure::Io(_) => 3,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Failure::Validation(_) => "validation",
            Failure::Numerical(e) => e.code(),
            Failure::Io(_) => "io",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid configuration: {m}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e}"),
            Failure::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}

/// Errors from the core library during a run: numerical breakdowns map to
/// exit 3, anything else means the input was unusable after all.
impl From<dephase_core::Error> for Failure {
    fn from(e: dephase_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e)
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// Scientific notation with 17 significant digits: every double round-trips.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// One CSV file. `trailer` lines are appended as `#` comments, which
/// gnuplot and most CSV readers skip.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub trailer: Vec<(String, f64)>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: vec![], trailer: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let mut out = w.into_inner().map_err(|e| e.into_error())?;
        for (k, v) in &self.trailer {
            out.extend_from_slice(format!("# {k},{}\n", format_float(*v)).as_bytes());
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    /// Passes when `measured <= tolerance`.
    pub fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed: measured <= tolerance, measured, tolerance, detail: String::new() }
    }

    /// Passes when `measured >= tolerance`.
    pub fn at_least(name: &str, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed: measured >= tolerance, measured, tolerance, detail: String::new() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Everything a scenario produces.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Scalar results, one column each in a sweep summary.
    pub metrics: Vec<(String, f64)>,
    /// Scenario-specific detail for the manifest.
    pub report: Value,
    pub truncation: Option<Value>,
    pub timescale: Option<Value>,
    /// Main numerical series, compared across sweep points.
    pub series: Vec<f64>,
}

impl Outcome {
    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push((name.into(), value));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dephase_core::Error;

    #[test]
    fn core_errors_map_to_exit_codes() {
        let numerical = Failure::from(Error::StepUnderflow { t: 1.0, h: 1e-300 });
        assert_eq!(numerical.exit_code(), 3);
        assert_eq!(numerical.code(), "step_underflow");
        let invalid = Failure::from(Error::InvalidArgument("x".into()));
        assert_eq!(invalid.exit_code(), 1);
    }

    #[test]
    fn checks_compare_against_tolerance() {
        assert!(Check::at_most("a", 1e-9, 1e-8).passed);
        assert!(!Check::at_most("a", f64::NAN, 1e-8).passed);
        assert!(Check::at_least("b", 3.0, 2.0).passed);
    }
}
