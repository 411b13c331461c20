use dephase_core::kinetics::{
    build_kinetic_q, evolve_boltzmann, mean_occupations, product_state, verify_derivative_consistency, FockBasis,
};
use dephase_core::master::{evolve_master_trajectory, Method};
use serde_json::json;

use super::{linspace, to_value};
use crate::config::{marginal, ExperimentConfig};
use crate::outcome::{Cell, Check, Failure, Outcome, Table};

pub fn run(config: &ExperimentConfig) -> Result<Outcome, Failure> {
    let k = config.kinetics.as_ref().expect("validated");
    let basis = FockBasis::new(k.modes.clone())?;
    let marginals =
        k.initial.iter().zip(&k.modes).map(|(m, spec)| marginal(m, spec)).collect::<Result<Vec<_>, _>>()?;
    let p0 = product_state(&basis, &marginals)?;
    let rep = verify_derivative_consistency(&basis, &k.processes, &p0)?;

    let mut out = Outcome::default();
    let mut derivatives = Table::new("derivatives", &["mode", "statistics", "exact", "boltzmann", "discrepancy"]);
    for m in &rep.modes {
        let stats = if k.modes[m.mode].is_fermion() { "fermion" } else { "boson" };
        derivatives.push(vec![m.mode.into(), stats.into(), m.exact.into(), m.boltzmann.into(), m.discrepancy.into()]);
        out.series.push(m.exact);
    }
    out.tables.push(derivatives);
    out.checks.push(Check::at_most("derivative_consistency", rep.max_discrepancy, k.tolerance));
    if let Some(t) = k.tail_tolerance {
        out.checks.push(Check::at_most("truncation_tail", rep.tail_mass, t));
    }
    out.metric("max_discrepancy", rep.max_discrepancy);
    out.metric("tail_mass", rep.tail_mass);
    out.metric("truncation_flux", rep.truncation_flux);

    let mut report = json!({ "basis_dim": basis.dim(), "consistency": to_value(&rep) });
    if k.horizon > 0.0 {
        let times = linspace(k.horizon, k.points);
        let q = build_kinetic_q(&basis, &k.processes)?.q;
        let exact = evolve_master_trajectory(&q, &p0, &times, Method::Uniformization)?;
        let y0 = mean_occupations(&p0, &basis)?.values;
        let kinetic = evolve_boltzmann(&k.modes, &k.processes, &y0, &times)?;
        let mut means = Table::new("means", &["t", "mode", "exact", "boltzmann"]);
        let mut gap = 0.0f64;
        for ((&t, p), y) in times.iter().zip(&exact).zip(&kinetic) {
            let m = mean_occupations(p, &basis)?.values;
            for (i, (a, b)) in m.iter().zip(y).enumerate() {
                means.push(vec![Cell::Float(t), i.into(), (*a).into(), (*b).into()]);
                gap = gap.max((a - b).abs());
            }
        }
        out.tables.push(means);
        out.metric("max_trajectory_gap", gap);
        report["max_trajectory_gap"] = json!(gap);
    }
    out.truncation = Some(json!({
        "dropped_transitions": rep.dropped_transitions,
        "truncation_flux": rep.truncation_flux,
        "tail_mass": rep.tail_mass,
    }));
    out.report = report;
    Ok(out)
}
