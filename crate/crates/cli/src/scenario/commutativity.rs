use dephase_core::kinetics::{diagram_commutativity, FockBasis, ShellSelector};
use serde_json::json;

use super::to_value;
use crate::config::ExperimentConfig;
use crate::outcome::{Check, Failure, Outcome, Table};

/// Relaxed distributions must sit this close to uniform for path A to be
/// the microcanonical average.
const STATIONARITY_TOL: f64 = 1e-8;
const FIXED_POINT_TOL: f64 = 1e-10;

pub fn run(config: &ExperimentConfig) -> Result<Outcome, Failure> {
    let c = config.commutativity.as_ref().expect("validated");
    let basis = FockBasis::new(c.modes.clone())?;
    let selector = match (&c.state, c.energy) {
        (Some(s), _) => ShellSelector::State(s.clone()),
        (None, Some(e)) => ShellSelector::Energy(e),
        (None, None) => unreachable!("validated"),
    };
    let rep = diagram_commutativity(&basis, &c.processes, &selector)?;

    let mut out = Outcome::default();
    let mut means = Table::new("means", &["component", "mode", "path_a", "path_b", "uniform"]);
    let mut components = Table::new("components", &["component", "size", "spectral_gap", "gap", "truncation_flux"]);
    let (mut stationarity, mut residual, mut flux) = (0.0f64, 0.0f64, 0.0f64);
    for (k, comp) in rep.components.iter().enumerate() {
        for (m, ((a, b), u)) in comp.path_a.iter().zip(&comp.path_b).zip(&comp.uniform_means).enumerate() {
            means.push(vec![k.into(), m.into(), (*a).into(), (*b).into(), (*u).into()]);
        }
        components.push(vec![
            k.into(),
            comp.size.into(),
            comp.spectral_gap.unwrap_or(0.0).into(),
            comp.gap.into(),
            comp.truncation_flux.into(),
        ]);
        stationarity = stationarity.max(comp.stationarity_error);
        residual = residual.max(comp.fixed_point_residual);
        flux = flux.max(comp.truncation_flux);
        out.series.extend(&comp.path_a);
    }
    out.tables.extend([means, components]);
    out.checks.push(Check::at_most("path_a_stationary", stationarity, STATIONARITY_TOL));
    out.checks.push(Check::at_most("path_b_fixed_point", residual, FIXED_POINT_TOL));
    out.metric("max_gap", rep.max_gap());
    out.metric("shell_size", rep.shell_size as f64);
    out.metric("truncation_flux", flux);
    out.truncation = Some(json!({ "truncation_flux": flux }));
    out.report = to_value(&rep);
    Ok(out)
}
