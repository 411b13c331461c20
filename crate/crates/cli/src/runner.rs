use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::config::{ExperimentConfig, ScenarioKind, SweepParameter, SweepSection};
use crate::outcome::{Cell, Check, Failure, Outcome, Table};
use crate::output::{write_manifest, write_tables, ErrorRecord, Manifest};
use crate::scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Run,
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Sweep => "sweep",
        }
    }
}

/// The part of a manifest needed to repeat it.
#[derive(Deserialize)]
struct Replay {
    command: String,
    config: ExperimentConfig,
}

/// Reads a TOML config, or a manifest written by an earlier run. A manifest
/// also fixes the command it was produced by.
pub fn load(path: &Path) -> Result<(ExperimentConfig, Option<Command>), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let r: Replay = serde_json::from_str(&text)
            .map_err(|e| Failure::Validation(format!("{} is not a manifest: {e}", path.display())))?;
        let cmd = match r.command.as_str() {
            "run" => Command::Run,
            "sweep" => Command::Sweep,
            other => return Err(Failure::Validation(format!("manifest records unknown command {other:?}"))),
        };
        Ok((r.config, Some(cmd)))
    } else {
        Ok((ExperimentConfig::from_toml(&text)?, None))
    }
}

fn scenario_name(kind: ScenarioKind) -> String {
    serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// `--out`, else the config's directory, else `$DEPHASE_OUT_DIR/<name>`,
/// else `out/<name>`.
pub fn output_dir(out: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    if let Some(o) = out {
        return o.to_path_buf();
    }
    if let Some(o) = &config.output_dir {
        return o.clone();
    }
    let root = std::env::var_os("DEPHASE_OUT_DIR").map_or_else(|| PathBuf::from("out"), PathBuf::from);
    root.join(config.name.clone().unwrap_or_else(|| scenario_name(config.scenario)))
}

/// Result of `execute`, for the caller to print.
pub struct Summary {
    pub exit_code: i32,
    pub dir: Option<PathBuf>,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

/// Validates, runs and writes one experiment. Nothing touches the disk
/// until validation has passed and the computation has finished.
pub fn execute(command: Command, config: &ExperimentConfig, dir: &Path) -> Summary {
    let validated = match command {
        Command::Run => config.validate(),
        Command::Sweep => match &config.sweep {
            Some(s) => config.validate_sweep(s),
            None => Err(Failure::Validation("sweep needs a parameter and values".into())),
        },
    };
    if let Err(e) = validated {
        return Summary { exit_code: e.exit_code(), dir: None, checks: vec![], error: Some(e.to_string()) };
    }

    let start = Instant::now();
    let result = match command {
        Command::Run => scenario::run(config),
        Command::Sweep => sweep(config, config.sweep.as_ref().expect("validated")),
    };
    let wall = start.elapsed().as_secs_f64();

    let (outcome, failure) = match result {
        Ok(o) => (o, None),
        Err(f @ Failure::Validation(_)) => {
            return Summary { exit_code: f.exit_code(), dir: None, checks: vec![], error: Some(f.to_string()) }
        }
        Err(f) => (Outcome::default(), Some(f)),
    };

    let outputs = if failure.is_none() {
        match write_tables(dir, &outcome.tables) {
            Ok(names) => names,
            Err(f) => return Summary { exit_code: f.exit_code(), dir: None, checks: vec![], error: Some(f.to_string()) },
        }
    } else {
        vec![]
    };
    let (status, exit_code) = match &failure {
        Some(f) => ("numerical_failure", f.exit_code()),
        None if outcome.passed() => ("ok", 0),
        None => ("check_failed", 2),
    };
    let manifest = Manifest {
        tool: "dephase",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        config,
        status,
        exit_code,
        error: failure.as_ref().map(|f| ErrorRecord { code: f.code().into(), message: f.to_string() }),
        wall_time_seconds: wall,
        outputs,
        checks: outcome.checks.clone(),
        metrics: outcome.metrics.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<Map<_, _>>(),
        truncation: outcome.truncation.clone().unwrap_or(Value::Null),
        timescale: outcome.timescale.clone().unwrap_or(Value::Null),
        report: outcome.report.clone(),
    };
    if let Err(f) = write_manifest(dir, &manifest) {
        return Summary { exit_code: f.exit_code(), dir: None, checks: outcome.checks, error: Some(f.to_string()) };
    }
    info!("finished {} in {wall:.3} s", command.name());
    Summary { exit_code, dir: Some(dir.to_path_buf()), checks: outcome.checks, error: failure.map(|f| f.to_string()) }
}

fn parameter_name(p: SweepParameter) -> String {
    serde_json::to_value(p).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// Runs the scenario once per value and stacks the results, each row keyed
/// by the swept value. Tables keep their scenario names; `sweep.csv` holds
/// one row of metrics per value.
fn sweep(config: &ExperimentConfig, s: &SweepSection) -> Result<Outcome, Failure> {
    let param = parameter_name(s.parameter);
    let mut out = Outcome::default();
    let mut combined: Vec<Table> = Vec::new();
    let mut summary: Option<Table> = None;
    let mut first_series: Option<Vec<f64>> = None;
    let mut points = Vec::new();

    for &value in &s.values {
        info!("sweep {param} = {value}");
        let c = config.with_sweep_value(s.parameter, value)?;
        let o = scenario::run(&c)?;

        for t in &o.tables {
            let idx = match combined.iter().position(|x| x.name == t.name) {
                Some(i) => i,
                None => {
                    let mut header = vec!["value".to_string()];
                    header.extend(t.header.iter().cloned());
                    combined.push(Table { name: t.name.clone(), header, rows: vec![], trailer: vec![] });
                    combined.len() - 1
                }
            };
            for row in &t.rows {
                let mut r = vec![Cell::Float(value)];
                r.extend(row.iter().cloned());
                combined[idx].rows.push(r);
            }
            combined[idx].trailer.extend(t.trailer.iter().map(|(k, v)| (format!("{k} {param}={value}"), *v)));
        }

        let deviation = match &first_series {
            None => {
                first_series = Some(o.series.clone());
                0.0
            }
            Some(f) if f.len() == o.series.len() => {
                f.iter().zip(&o.series).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            }
            Some(_) => f64::NAN,
        };
        let summary = summary.get_or_insert_with(|| {
            let mut header = vec!["value".to_string()];
            header.extend(o.metrics.iter().map(|(k, _)| k.clone()));
            header.push("deviation_from_first".into());
            Table { name: "sweep".into(), header, rows: vec![], trailer: vec![] }
        });
        if summary.header.len() != o.metrics.len() + 2 {
            warn!("metrics differ between sweep points; summary row for {value} is skipped");
        } else {
            let mut row = vec![Cell::Float(value)];
            row.extend(o.metrics.iter().map(|(_, v)| Cell::Float(*v)));
            row.push(Cell::Float(deviation));
            summary.rows.push(row);
        }

        out.checks.extend(o.checks.iter().cloned().map(|mut ch| {
            ch.name = format!("{param}={value}: {}", ch.name);
            ch
        }));
        points.push(json!({
            "value": value,
            "metrics": o.metrics.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<Map<_, _>>(),
            "deviation_from_first": deviation,
            "report": o.report,
            "truncation": o.truncation,
            "timescale": o.timescale,
        }));
    }
    out.tables = combined;
    out.tables.extend(summary);
    out.report = json!({ "parameter": param, "points": points });
    Ok(out)
}
