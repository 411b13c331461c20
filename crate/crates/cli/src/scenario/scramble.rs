use dephase_core::master::{
    build_q_matrix, evolve_master_trajectory, phase_scramble_evolution, Method, ScrambleSettings, SystemSpec,
};
use dephase_core::spectral::ProbabilityVector;
use dephase_core::timescale::applicability_window;
use serde_json::json;

use super::{horizon_time, to_value};
use crate::config::{initial_distribution, parse_propagator, scramble_period, ExperimentConfig, ScrambleSection};
use crate::outcome::{Check, Failure, Outcome, Table};

/// Sup-norm deviation between master and scrambled trajectories.
struct Comparison {
    table: Table,
    /// Largest `|P_master - P_scramble|` over times and states.
    max_deviation: f64,
    /// Largest ratio of the per-time deviation to its allowance; at most one
    /// when the bridge holds.
    worst_ratio: f64,
    series: Vec<f64>,
}

fn compare(
    name: &str,
    spec: &SystemSpec,
    p0: &ProbabilityVector,
    horizon: f64,
    settings: &ScrambleSettings,
    s: &ScrambleSection,
) -> Result<Comparison, Failure> {
    let q = build_q_matrix(spec);
    let scr = phase_scramble_evolution(spec, p0, horizon, settings)?;
    let exact = evolve_master_trajectory(&q, p0, &scr.times, Method::Expm)?;
    let mut table = Table::new(name, &["t", "state", "p_master", "p_scramble", "stderr"]);
    let (mut max_deviation, mut worst_ratio) = (0.0f64, 0.0f64);
    let mut series = Vec::new();
    for (k, &t) in scr.times.iter().enumerate() {
        let (pm, ps, se) = (&exact[k], &scr.mean[k], &scr.standard_error[k]);
        let mut dev = 0.0f64;
        for i in 0..spec.dim() {
            table.push(vec![t.into(), i.into(), pm[i].into(), ps[i].into(), se[i].into()]);
            dev = dev.max((pm[i] - ps[i]).abs());
            series.push(ps[i]);
        }
        let se_max = se.iter().copied().fold(0.0, f64::max);
        let allowed = (s.stderr_factor * se_max).max(s.abs_tolerance);
        max_deviation = max_deviation.max(dev);
        worst_ratio = worst_ratio.max(dev / allowed);
    }
    table.trailer.push(("max_deviation".into(), max_deviation));
    Ok(Comparison { table, max_deviation, worst_ratio, series })
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome, Failure> {
    let s = config.scramble.as_ref().expect("validated");
    let spec = config.system_spec()?;
    let q = build_q_matrix(&spec);
    let (target, gap) = horizon_time(s.horizon, &q)?;
    let period = scramble_period(&s.period, &spec)?;
    let steps = (target / period - 1e-9).ceil().max(1.0);
    let horizon = steps * period;
    let p0 = initial_distribution(&s.initial, spec.dim())?;
    let settings = ScrambleSettings {
        period,
        samples: s.samples,
        seed: config.seed,
        propagator: parse_propagator(&s.propagator)?,
    };

    let window = applicability_window(&spec, s.margin)?;
    let weak = compare("comparison", &spec, &p0, horizon, &settings, s)?;
    let mut out = Outcome::default();
    out.checks.push(
        Check::at_most("scramble_matches_master", weak.worst_ratio, 1.0).with_detail(format!(
            "max deviation {:e}; allowance max({} stderr, {})",
            weak.max_deviation, s.stderr_factor, s.abs_tolerance
        )),
    );
    out.checks.push(
        Check::at_least("dt_admissible", window.achieved_margin, s.margin)
            .with_detail("achieved margin min(dt / t_max, t_a / dt)"),
    );
    out.metric("max_deviation", weak.max_deviation);
    out.metric("allowance_ratio", weak.worst_ratio);
    out.metric("achieved_margin", window.achieved_margin);
    out.series = weak.series;
    out.tables.push(weak.table);

    let mut report = json!({
        "states": spec.dim(),
        "period": period,
        "steps": steps as u64,
        "horizon": horizon,
        "spectral_gap": gap,
        "samples": s.samples,
        "max_deviation": weak.max_deviation,
        "allowance_ratio": weak.worst_ratio,
    });
    if let Some(scale) = s.compare_coupling_scale {
        let strong_spec = spec.with_coupling_scale(scale)?;
        let strong = compare("comparison_strong", &strong_spec, &p0, horizon, &settings, s)?;
        let ratio = strong.max_deviation / weak.max_deviation;
        out.checks.push(
            Check::at_least("strong_coupling_deviates", ratio, s.strong_ratio)
                .with_detail(format!("deviation {:e} at {scale}x coupling", strong.max_deviation)),
        );
        out.metric("strong_max_deviation", strong.max_deviation);
        report["strong"] = json!({
            "coupling_scale": scale,
            "max_deviation": strong.max_deviation,
            "deviation_ratio": ratio,
            "timescale": to_value(&applicability_window(&strong_spec, s.margin)?),
        });
        out.tables.push(strong.table);
    }
    out.timescale = Some(to_value(&window));
    out.report = report;
    Ok(out)
}
