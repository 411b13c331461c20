mod bistochastic;
mod commutativity;
mod kinetics;
mod master;
mod scramble;
mod timescale;

use dephase_core::master::{stationary_analysis, RateMatrix};
use serde::Serialize;
use serde_json::Value;

use crate::config::{ExperimentConfig, Horizon, ScenarioKind};
use crate::outcome::{Failure, Outcome};

/// Runs a validated config.
pub fn run(config: &ExperimentConfig) -> Result<Outcome, Failure> {
    match config.scenario {
        ScenarioKind::Bistochastic => bistochastic::run(config),
        ScenarioKind::Master => master::run(config),
        ScenarioKind::ScrambleCompare => scramble::run(config),
        ScenarioKind::Kinetics => kinetics::run(config),
        ScenarioKind::Commutativity => commutativity::run(config),
        ScenarioKind::Timescale => timescale::run(config),
    }
}

/// `points` evenly spaced times on `[0, t]`, ending exactly at `t`.
pub(crate) fn linspace(t: f64, points: usize) -> Vec<f64> {
    let last = points - 1;
    (0..points).map(|k| if k == last { t } else { t * k as f64 / last as f64 }).collect()
}

/// Resolves a horizon against the relaxation time of `q`.
pub(crate) fn horizon_time(h: Horizon, q: &RateMatrix) -> Result<(f64, Option<f64>), Failure> {
    let gap = stationary_analysis(q).spectral_gap;
    match h {
        Horizon::Time(t) => Ok((t, gap)),
        Horizon::Gaps(g) => match gap {
            Some(gap) => Ok((g / gap, Some(gap))),
            None => Err(Failure::Validation(
                "a horizon in units of 1/gap needs a connected chain with more than one state".into(),
            )),
        },
    }
}

pub(crate) fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialise")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_hits_both_ends() {
        let t = linspace(0.3, 4);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[3], 0.3);
        assert_eq!(t.len(), 4);
    }
}
