use std::f64::consts::TAU;

use rand::Rng;

use super::{one_step_propagator, Propagator, SystemSpec};
use crate::spectral::ProbabilityVector;
use crate::stats::{reduce_samples, sample_rng};
use crate::{Error, Result, C64};

/// Parameters of the phase-scrambling protocol: evolve unitarily for
/// `period`, replace every phase by a fresh uniform draw, repeat.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScrambleSettings {
    pub period: f64,
    pub samples: usize,
    pub seed: u64,
    pub propagator: Propagator,
}

impl ScrambleSettings {
    pub fn new(period: f64, samples: usize, seed: u64) -> Self {
        Self { period, samples, seed, propagator: Propagator::Full }
    }

    /// Period at which the protocol reproduces the rate matrix built from
    /// `spec`.
    ///
    /// Its rates `(2/hbar^2)|V|^2 dt` are the growth rate of a transition
    /// probability `|V|^2 s^2 / hbar^2` at the end of a coherent interval of
    /// length `s = dt`; averaged over a scrambling period `tau` the same
    /// probability gives `|V|^2 tau / hbar^2`, which agrees for `tau = 2 dt`.
    pub fn rate_matched(spec: &SystemSpec, samples: usize, seed: u64) -> Self {
        Self::new(2.0 * spec.dt(), samples, seed)
    }
}

/// Monte Carlo estimate of the scrambled probability trajectory, at times
/// `0, period, 2 period, ...`.
#[derive(Clone, Debug)]
pub struct ScrambleTrajectory {
    pub times: Vec<f64>,
    pub mean: Vec<ProbabilityVector>,
    pub standard_error: Vec<Vec<f64>>,
    pub samples: usize,
}

/// Runs the scrambling protocol up to `horizon`, which must be a whole number
/// of periods up to rounding. Phases of zero-magnitude amplitudes are not
/// drawn. Deterministic for a given seed regardless of threading.
pub fn phase_scramble_evolution(
    spec: &SystemSpec,
    p0: &ProbabilityVector,
    horizon: f64,
    settings: &ScrambleSettings,
) -> Result<ScrambleTrajectory> {
    let n = spec.dim();
    if p0.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p0.dim() });
    }
    if settings.samples == 0 {
        return Err(Error::InvalidArgument("scrambling needs at least one sample".into()));
    }
    if !(settings.period > 0.0 && settings.period.is_finite()) {
        return Err(Error::InvalidArgument(format!("scrambling period must be positive, got {}", settings.period)));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be nonnegative, got {horizon}")));
    }
    let steps = (horizon / settings.period).round();
    if (steps * settings.period - horizon).abs() > 1e-9 * horizon.max(settings.period) {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} is not a whole number of periods {}",
            settings.period
        )));
    }
    let steps = steps as usize;

    let u = one_step_propagator(spec, settings.period, settings.propagator);
    let m = u.matrix();
    let start: Vec<f64> = p0.iter().map(|p| p.sqrt()).collect();

    let moments = reduce_samples(settings.samples, (steps + 1) * n, |i, acc| {
        let mut rng = sample_rng(settings.seed, i);
        let mut mag = start.clone();
        let mut a = vec![C64::new(0.0, 0.0); n];
        let mut record = Vec::with_capacity((steps + 1) * n);
        record.extend(mag.iter().map(|r| r * r));
        for _ in 0..steps {
            for (ab, &r) in a.iter_mut().zip(&mag) {
                *ab = if r > 0.0 { C64::from_polar(r, rng.random::<f64>() * TAU) } else { C64::new(0.0, 0.0) };
            }
            for (row, out) in mag.iter_mut().enumerate() {
                let mut s = C64::new(0.0, 0.0);
                for (col, &ac) in a.iter().enumerate() {
                    s += m[(row, col)] * ac;
                }
                *out = s.norm();
            }
            record.extend(mag.iter().map(|r| r * r));
        }
        acc.push(&record);
    });

    let se = moments.standard_error();
    let mut mean = Vec::with_capacity(steps + 1);
    let mut standard_error = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let slice = &moments.mean()[k * n..(k + 1) * n];
        mean.push(ProbabilityVector::new(slice.to_vec())?);
        standard_error.push(se[k * n..(k + 1) * n].to_vec());
    }
    Ok(ScrambleTrajectory {
        times: (0..=steps).map(|k| k as f64 * settings.period).collect(),
        mean,
        standard_error,
        samples: settings.samples,
    })
}
