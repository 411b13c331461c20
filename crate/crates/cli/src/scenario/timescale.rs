use std::f64::consts::PI;

use dephase_core::timescale::{applicability_window, chi, chi_bar, chi_bar_sq_integral, chi_sq_integral};
use serde_json::json;

use super::to_value;
use crate::config::ExperimentConfig;
use crate::outcome::{Check, Failure, Outcome, Table};

pub fn run(config: &ExperimentConfig) -> Result<Outcome, Failure> {
    let ts = config.timescale.as_ref().expect("validated");
    let spec = config.system_spec()?;
    let (dt, hbar, w) = (spec.dt(), spec.hbar(), spec.half_width());

    let mut out = Outcome::default();
    let mut window = Table::new("window", &["energy", "chi_re", "chi_im", "chi_abs_sq", "chi_bar"]);
    let last = ts.grid_points - 1;
    for k in 0..ts.grid_points {
        let e = ts.grid_extent * w * (2.0 * k as f64 / last as f64 - 1.0);
        let c = chi(e, dt, hbar);
        window.push(vec![e.into(), c.re.into(), c.im.into(), c.norm_sqr().into(), chi_bar(e, dt, hbar).into()]);
        out.series.push(c.norm_sqr());
    }
    out.tables.push(window);

    let expected = 2.0 * PI * hbar / dt;
    let smooth = chi_sq_integral(dt, hbar)?;
    let sharp = chi_bar_sq_integral(dt, hbar)?;
    let rel = |x: f64| (x - expected).abs() / expected;
    out.checks.push(Check::at_most("chi_norm", rel(smooth.value), ts.norm_tolerance));
    out.checks.push(Check::at_most("chi_bar_norm", rel(sharp.value), ts.norm_tolerance));
    out.checks.push(Check::at_most("norms_agree", (smooth.value - sharp.value).abs() / expected, ts.norm_tolerance));

    let report = applicability_window(&spec, ts.margin)?;
    out.metric("chi_norm", smooth.value);
    out.metric("chi_bar_norm", sharp.value);
    out.metric("t_max", report.t_max);
    out.metric("t_a", report.t_a);
    out.metric("achieved_margin", report.achieved_margin);
    out.report = json!({
        "expected_norm": expected,
        "chi_norm": to_value(&smooth),
        "chi_bar_norm": to_value(&sharp),
        "admissible": report.admissible,
    });
    out.timescale = Some(to_value(&report));
    Ok(out)
}
