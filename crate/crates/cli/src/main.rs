//! `dephase`: config-driven experiments on phase-averaged dynamics.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 a check exceeded its
//! tolerance, 3 numerical or i/o failure.

// `!(x >= 1.0)` is deliberate: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod outcome;
mod output;
mod runner;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::SweepParameter;
use outcome::Failure;
use runner::{Command, Summary};

#[derive(Parser)]
#[command(name = "dephase", about = "Phase-averaged dynamics experiments", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (TOML) or a manifest from an earlier run.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory [default: $DEPHASE_OUT_DIR/<name>, else out/<name>].
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Only print errors.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario, or repeat the run recorded in a manifest.
    Run(Common),
    /// Run a scenario once per value of a parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to vary; overrides the config's [sweep] section.
        #[arg(long, value_enum)]
        parameter: Option<SweepParameter>,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
    },
    /// Check a config without running it.
    Validate(Common),
    /// Print version information.
    Version,
}

fn init_logging(quiet: bool) {
    let level = if quiet { "error" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
}

fn parse_values(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|e| Failure::Validation(format!("sweep value {v:?}: {e}"))))
        .collect()
}

fn report(summary: &Summary, quiet: bool) {
    if let Some(e) = &summary.error {
        eprintln!("error: {e}");
    }
    if quiet {
        return;
    }
    for c in &summary.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {}: measured {:e}, tolerance {:e}", c.name, c.measured, c.tolerance);
    }
    if let Some(d) = &summary.dir {
        println!("wrote {}", d.display());
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("error: {f}");
    ExitCode::from(f.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };

    let (common, mut command, sweep_override) = match cli.command {
        Cmd::Version => {
            println!("dephase {} (dephase-core {})", env!("CARGO_PKG_VERSION"), dephase_core::VERSION);
            return ExitCode::SUCCESS;
        }
        Cmd::Run(c) => (c, Command::Run, None),
        Cmd::Validate(c) => {
            init_logging(c.quiet);
            let mut config = match runner::load(&c.config) {
                Ok((config, _)) => config,
                Err(f) => return fail(f),
            };
            if let Some(s) = c.seed {
                config.seed = s;
            }
            return match config.validate() {
                Ok(()) => {
                    if !c.quiet {
                        println!("{}: valid", c.config.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(f) => fail(f),
            };
        }
        Cmd::Sweep { common, parameter, values } => (common, Command::Sweep, Some((parameter, values))),
    };
    init_logging(common.quiet);

    let (mut config, recorded) = match runner::load(&common.config) {
        Ok(x) => x,
        Err(f) => return fail(f),
    };
    if command == Command::Run {
        if let Some(r) = recorded {
            command = r;
        }
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some((parameter, values)) = sweep_override {
        let values = match values.as_deref().map(parse_values).transpose() {
            Ok(v) => v,
            Err(f) => return fail(f),
        };
        match (parameter, values, config.sweep.as_mut()) {
            (Some(p), Some(v), _) => config.sweep = Some(config::SweepSection { parameter: p, values: v }),
            (Some(p), None, Some(s)) => s.parameter = p,
            (None, Some(v), Some(s)) => s.values = v,
            (None, None, Some(_)) => {}
            _ => return fail(Failure::Validation("sweep needs --parameter and --values or a [sweep] section".into())),
        }
    }

    let dir = runner::output_dir(common.out.as_deref(), &config);
    let summary = runner::execute(command, &config, &dir);
    report(&summary, common.quiet);
    ExitCode::from(summary.exit_code as u8)
}
