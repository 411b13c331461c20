use dephase_core::master::{build_q_matrix, evolve_master_trajectory, stationary_analysis, Method};
use dephase_core::spectral::ProbabilityVector;
use dephase_core::timescale::{applicability_window, DEFAULT_MARGIN};
use serde_json::json;

use super::{horizon_time, linspace, to_value};
use crate::config::{initial_distribution, ExperimentConfig};
use crate::outcome::{Check, Failure, Outcome, Table};

const METHODS: [Method; 3] = [Method::Expm, Method::Uniformization, Method::RungeKutta];
const MASS_TOL: f64 = 1e-12;
const ENTROPY_SLACK: f64 = 1e-12;

pub fn run(config: &ExperimentConfig) -> Result<Outcome, Failure> {
    let m = config.master.as_ref().expect("validated");
    let spec = config.system_spec()?;
    let q = build_q_matrix(&spec);
    let method: Method = m.method.parse()?;
    let p0 = initial_distribution(&m.initial, spec.dim())?;
    let (horizon, _) = horizon_time(m.horizon, &q)?;
    let times = linspace(horizon, m.points);
    let traj = evolve_master_trajectory(&q, &p0, &times, method)?;

    let stationary = stationary_analysis(&q);
    let uniform = ProbabilityVector::uniform(spec.dim())?;
    let mut out = Outcome::default();
    let mut trajectory = Table::new("trajectory", &["t", "state", "probability"]);
    let mut summary = Table::new("summary", &["t", "entropy", "distance_to_uniform"]);
    let (mut mass_err, mut entropy_drop) = (0.0f64, 0.0f64);
    let mut last_entropy = p0.entropy();
    for (&t, p) in times.iter().zip(&traj) {
        for (i, &x) in p.iter().enumerate() {
            trajectory.push(vec![t.into(), i.into(), x.into()]);
        }
        let h = p.entropy();
        summary.push(vec![t.into(), h.into(), p.sup_distance(&uniform).into()]);
        mass_err = mass_err.max((p.total() - 1.0).abs());
        entropy_drop = entropy_drop.max(last_entropy - h);
        last_entropy = h;
        out.series.extend(p.iter());
    }
    out.tables.extend([trajectory, summary]);
    out.checks.push(Check::at_most("probability_conservation", mass_err, MASS_TOL));
    out.checks.push(Check::at_most("entropy_non_decreasing", entropy_drop, ENTROPY_SLACK));

    let final_distance = traj.last().expect("at least two points").sup_distance(&uniform);
    if let Some(tol) = m.relaxation_tolerance {
        out.checks.push(Check::at_most("relaxation_to_uniform", final_distance, tol));
    }
    if m.cross_validate {
        let mut worst = 0.0f64;
        for other in METHODS.into_iter().filter(|&x| x != method) {
            let alt = evolve_master_trajectory(&q, &p0, &times, other)?;
            for (a, b) in traj.iter().zip(&alt) {
                worst = worst.max(a.sup_distance(b));
            }
        }
        out.checks.push(Check::at_most("method_agreement", worst, m.cross_tolerance));
        out.metric("method_disagreement", worst);
    }

    let gap = stationary.spectral_gap.unwrap_or(0.0);
    out.metric("spectral_gap", gap);
    out.metric("relaxation_time", if gap > 0.0 { 1.0 / gap } else { f64::INFINITY });
    out.metric("max_exit_rate", q.max_exit_rate());
    out.metric("final_distance_to_uniform", final_distance);
    out.timescale = Some(to_value(&applicability_window(&spec, DEFAULT_MARGIN)?));
    out.report = json!({
        "states": spec.dim(),
        "dt": spec.dt(),
        "half_width": spec.half_width(),
        "horizon": horizon,
        "method": m.method,
        "spectral_gap": stationary.spectral_gap,
        "ergodic": stationary.ergodic,
        "components": stationary.components,
        "max_exit_rate": q.max_exit_rate(),
        "final_distance_to_uniform": final_distance,
    });
    Ok(out)
}
