//! Experiment configuration: one TOML file describes one scenario.
//!
//! Every field is validated before anything runs, so a rejected config never
//! produces output files.

use std::path::PathBuf;

use dephase_core::kinetics::{ModeSpec, ProcessSpec, Statistics};
use dephase_core::master::{Method, SystemSpec, Window};
use dephase_core::spectral::{random_hermitian, ProbabilityVector};
use dephase_core::stats::sample_rng;
use dephase_core::C64;
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Random stream reserved for generating systems, disjoint from the
/// per-sample Monte Carlo streams.
const SYSTEM_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Bistochastic,
    Master,
    ScrambleCompare,
    Kinetics,
    Commutativity,
    Timescale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub scenario: ScenarioKind,
    /// Always explicit: nothing is seeded from the clock.
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bistochastic: Option<BistochasticSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master: Option<MasterSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scramble: Option<ScrambleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinetics: Option<KineticsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commutativity: Option<CommutativitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timescale: Option<TimescaleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Seeded random system: energies uniform in `[0, energy_spread]`, couplings
/// from a standard-normal Hermitian matrix scaled by `coupling`, zero
/// diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSystem {
    pub states: usize,
    pub energy_spread: f64,
    pub coupling: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    /// Upper-triangle entries; the lower triangle is their conjugate.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub couplings: Vec<Coupling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomSystem>,
    /// Multiplies every coupling; swept by `coupling-scale`.
    #[serde(default = "one")]
    pub coupling_scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseAverageSection {
    pub dim: usize,
    pub samples: usize,
    pub seeds: usize,
    #[serde(default = "default_sigmas")]
    pub sigmas: f64,
    #[serde(default = "default_coverage")]
    pub coverage: f64,
}

fn default_sigmas() -> f64 {
    4.0
}

fn default_coverage() -> f64 {
    0.95
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BistochasticSection {
    pub sizes: Vec<usize>,
    pub count: usize,
    #[serde(default = "one")]
    pub generator_time: f64,
    #[serde(default = "default_validation_tol")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_average: Option<PhaseAverageSection>,
}

fn default_validation_tol() -> f64 {
    1e-10
}

/// Initial distribution: a single basis state or explicit probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initial {
    State(usize),
    Probabilities(Vec<f64>),
}

impl Default for Initial {
    fn default() -> Self {
        Initial::State(0)
    }
}

/// Length of a run, absolute or in units of the relaxation time `1/gap`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Horizon {
    Time(f64),
    Gaps(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MasterSection {
    #[serde(default = "default_method")]
    pub method: String,
    pub horizon: Horizon,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub initial: Initial,
    /// Also run the other two methods and require agreement within
    /// `cross_tolerance`.
    #[serde(default)]
    pub cross_validate: bool,
    #[serde(default = "default_cross_tol")]
    pub cross_tolerance: f64,
    /// Require the final distribution to lie this close to uniform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxation_tolerance: Option<f64>,
}

fn default_method() -> String {
    "expm".into()
}

fn default_points() -> usize {
    21
}

fn default_cross_tol() -> f64 {
    1e-8
}

/// Scrambling period: matched to the rate matrix (`2 dt`), literally `dt`,
/// or an explicit time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PeriodSpec {
    Named(String),
    Time(f64),
}

impl Default for PeriodSpec {
    fn default() -> Self {
        PeriodSpec::Named("rate-matched".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScrambleSection {
    pub samples: usize,
    #[serde(default)]
    pub period: PeriodSpec,
    pub horizon: Horizon,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default = "default_propagator")]
    pub propagator: String,
    /// Allowed deviation: `max(stderr_factor * stderr, abs_tolerance)`.
    #[serde(default = "default_abs_tol")]
    pub abs_tolerance: f64,
    #[serde(default = "default_stderr_factor")]
    pub stderr_factor: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Repeat with couplings scaled by this factor and require a deviation
    /// at least `strong_ratio` times larger.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_coupling_scale: Option<f64>,
    #[serde(default = "default_strong_ratio")]
    pub strong_ratio: f64,
}

fn default_propagator() -> String {
    "full".into()
}

fn default_abs_tol() -> f64 {
    0.02
}

fn default_stderr_factor() -> f64 {
    5.0
}

fn default_margin() -> f64 {
    dephase_core::timescale::DEFAULT_MARGIN
}

fn default_strong_ratio() -> f64 {
    2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MarginalSpec {
    /// Fermion occupied with probability `f`.
    Fermion { f: f64 },
    /// Truncated geometric with the given untruncated mean.
    Geometric { mean: f64 },
    /// Truncated Bose-Einstein at `temperature`.
    Thermal { temperature: f64 },
    /// Definite occupation `n`.
    Occupied { n: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticsSection {
    pub modes: Vec<ModeSpec>,
    pub processes: Vec<ProcessSpec>,
    pub initial: Vec<MarginalSpec>,
    /// Length of the trajectory comparing exact and Boltzmann means; zero
    /// skips it.
    #[serde(default)]
    pub horizon: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_kinetic_tol")]
    pub tolerance: f64,
    /// Upper bound on the probability of sitting at any boson cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_tolerance: Option<f64>,
}

fn default_kinetic_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutativitySection {
    pub modes: Vec<ModeSpec>,
    pub processes: Vec<ProcessSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimescaleSection {
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Grid extent in units of the shell half-width.
    #[serde(default = "default_grid_extent")]
    pub grid_extent: f64,
    /// Relative tolerance on both window normalisation integrals.
    #[serde(default = "default_norm_tol")]
    pub norm_tolerance: f64,
}

fn default_norm_tol() -> f64 {
    1e-6
}

fn default_grid_points() -> usize {
    801
}

fn default_grid_extent() -> f64 {
    4.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    Dt,
    CouplingScale,
    NMax,
    Samples,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn positive(x: f64, what: &str) -> Result<(), Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be positive and finite, got {x}")))
    }
}

fn section<'a, T>(s: &'a Option<T>, name: &str, scenario: ScenarioKind) -> Result<&'a T, Failure> {
    s.as_ref().ok_or_else(|| invalid(format!("scenario {scenario:?} needs a [{name}] section")))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| invalid(format!("config does not parse: {e}")))
    }

    /// Checks every precondition of the scenario without running it.
    pub fn validate(&self) -> Result<(), Failure> {
        use ScenarioKind::*;
        match self.scenario {
            Bistochastic => {
                let b = section(&self.bistochastic, "bistochastic", self.scenario)?;
                if b.sizes.is_empty() || b.sizes.contains(&0) || b.count == 0 {
                    return Err(invalid("bistochastic needs nonempty positive sizes and count >= 1"));
                }
                positive(b.generator_time, "generator_time")?;
                positive(b.tolerance, "tolerance")?;
                if let Some(pa) = &b.phase_average {
                    if pa.dim == 0 || pa.samples == 0 || pa.seeds == 0 {
                        return Err(invalid("phase_average needs dim, samples and seeds >= 1"));
                    }
                    positive(pa.sigmas, "sigmas")?;
                    if !(0.0..=1.0).contains(&pa.coverage) {
                        return Err(invalid("coverage must lie in [0, 1]"));
                    }
                }
            }
            Master => {
                let spec = self.system_spec()?;
                let m = section(&self.master, "master", self.scenario)?;
                m.method.parse::<Method>().map_err(|e| invalid(e.to_string()))?;
                check_horizon(m.horizon)?;
                if m.points < 2 {
                    return Err(invalid("points must be at least 2"));
                }
                positive(m.cross_tolerance, "cross_tolerance")?;
                if let Some(t) = m.relaxation_tolerance {
                    positive(t, "relaxation_tolerance")?;
                }
                initial_distribution(&m.initial, spec.dim())?;
            }
            ScrambleCompare => {
                let spec = self.system_spec()?;
                let s = section(&self.scramble, "scramble", self.scenario)?;
                if s.samples == 0 {
                    return Err(invalid("samples must be at least 1"));
                }
                check_horizon(s.horizon)?;
                scramble_period(&s.period, &spec)?;
                parse_propagator(&s.propagator)?;
                positive(s.abs_tolerance, "abs_tolerance")?;
                positive(s.stderr_factor, "stderr_factor")?;
                positive(s.strong_ratio, "strong_ratio")?;
                if !(s.margin >= 1.0) {
                    return Err(invalid("margin must be at least 1"));
                }
                if let Some(c) = s.compare_coupling_scale {
                    positive(c, "compare_coupling_scale")?;
                }
                initial_distribution(&s.initial, spec.dim())?;
            }
            Kinetics => {
                let k = section(&self.kinetics, "kinetics", self.scenario)?;
                validate_network(&k.modes, &k.processes)?;
                if k.initial.len() != k.modes.len() {
                    return Err(invalid(format!("{} marginals for {} modes", k.initial.len(), k.modes.len())));
                }
                for (i, (m, spec)) in k.initial.iter().zip(&k.modes).enumerate() {
                    marginal(m, spec).map_err(|e| invalid(format!("marginal {i}: {e}")))?;
                }
                if !(k.horizon >= 0.0 && k.horizon.is_finite()) {
                    return Err(invalid("horizon must be nonnegative"));
                }
                if k.horizon > 0.0 && k.points < 2 {
                    return Err(invalid("points must be at least 2"));
                }
                positive(k.tolerance, "tolerance")?;
                if let Some(t) = k.tail_tolerance {
                    positive(t, "tail_tolerance")?;
                }
            }
            Commutativity => {
                let c = section(&self.commutativity, "commutativity", self.scenario)?;
                validate_network(&c.modes, &c.processes)?;
                match (&c.state, c.energy) {
                    (Some(s), None) => {
                        if s.len() != c.modes.len() || s.iter().zip(&c.modes).any(|(&n, m)| n > m.n_max) {
                            return Err(invalid(format!("state {s:?} is not an occupation tuple of the modes")));
                        }
                    }
                    (None, Some(e)) if e.is_finite() => {}
                    _ => return Err(invalid("commutativity needs exactly one of state or energy")),
                }
            }
            Timescale => {
                self.system_spec()?;
                let t = section(&self.timescale, "timescale", self.scenario)?;
                if !(t.margin >= 1.0) {
                    return Err(invalid("margin must be at least 1"));
                }
                if t.grid_points < 2 {
                    return Err(invalid("grid_points must be at least 2"));
                }
                positive(t.grid_extent, "grid_extent")?;
                positive(t.norm_tolerance, "norm_tolerance")?;
            }
        }
        if let Some(s) = &self.sweep {
            self.validate_sweep(s)?;
        }
        Ok(())
    }

    pub fn validate_sweep(&self, s: &SweepSection) -> Result<(), Failure> {
        if s.values.is_empty() {
            return Err(invalid("sweep needs at least one value"));
        }
        for &v in &s.values {
            self.with_sweep_value(s.parameter, v)?.validate_without_sweep()?;
        }
        Ok(())
    }

    fn validate_without_sweep(&self) -> Result<(), Failure> {
        let mut c = self.clone();
        c.sweep = None;
        c.validate()
    }

    /// Copy of the config with one swept parameter replaced.
    pub fn with_sweep_value(&self, parameter: SweepParameter, value: f64) -> Result<Self, Failure> {
        let mut c = self.clone();
        c.sweep = None;
        let integer = |v: f64, what: &str| -> Result<usize, Failure> {
            if v >= 1.0 && v.fract() == 0.0 && v < 1e15 {
                Ok(v as usize)
            } else {
                Err(invalid(format!("{what} must be a positive integer, got {v}")))
            }
        };
        match parameter {
            SweepParameter::Dt => {
                positive(value, "dt")?;
                let s = c.system.as_mut().ok_or_else(|| invalid("dt sweep needs a [system] section"))?;
                s.dt = Some(value);
                s.half_width = None;
            }
            SweepParameter::CouplingScale => {
                if !(value >= 0.0 && value.is_finite()) {
                    return Err(invalid(format!("coupling scale must be nonnegative, got {value}")));
                }
                c.system.as_mut().ok_or_else(|| invalid("coupling-scale sweep needs a [system] section"))?.coupling_scale =
                    value;
            }
            SweepParameter::NMax => {
                let n = integer(value, "n_max")?;
                let modes = match (&mut c.kinetics, &mut c.commutativity) {
                    (Some(k), _) => &mut k.modes,
                    (_, Some(k)) => &mut k.modes,
                    _ => return Err(invalid("n-max sweep needs a [kinetics] or [commutativity] section")),
                };
                for m in modes.iter_mut().filter(|m| m.statistics == Statistics::Boson) {
                    m.n_max = n;
                }
            }
            SweepParameter::Samples => {
                let k = integer(value, "sample count")?;
                if let Some(s) = c.scramble.as_mut() {
                    s.samples = k;
                } else if let Some(pa) = c.bistochastic.as_mut().and_then(|b| b.phase_average.as_mut()) {
                    pa.samples = k;
                } else {
                    return Err(invalid("samples sweep needs [scramble] or [bistochastic.phase_average]"));
                }
            }
        }
        Ok(c)
    }

    /// The system described by `[system]`.
    pub fn system_spec(&self) -> Result<SystemSpec, Failure> {
        let s = section(&self.system, "system", self.scenario)?;
        positive(s.hbar, "hbar")?;
        let window = match (s.dt, s.half_width) {
            (Some(dt), None) => {
                positive(dt, "dt")?;
                Window::Dt(dt)
            }
            (None, Some(w)) => {
                positive(w, "half_width")?;
                Window::HalfWidth(w)
            }
            _ => return Err(invalid("[system] needs exactly one of dt or half_width")),
        };
        if !(s.coupling_scale >= 0.0 && s.coupling_scale.is_finite()) {
            return Err(invalid("coupling_scale must be nonnegative"));
        }
        let (energies, v) = match (&s.energies, &s.random) {
            (Some(e), None) => {
                let n = e.len();
                let mut v = DMatrix::zeros(n, n);
                for c in &s.couplings {
                    if c.i >= n || c.j >= n || c.i == c.j {
                        return Err(invalid(format!("coupling ({}, {}) is not an off-diagonal entry of {n} states", c.i, c.j)));
                    }
                    if !(c.re.is_finite() && c.im.is_finite()) {
                        return Err(invalid("coupling values must be finite"));
                    }
                    v[(c.i, c.j)] = C64::new(c.re, c.im);
                    v[(c.j, c.i)] = C64::new(c.re, -c.im);
                }
                (e.clone(), v)
            }
            (None, Some(r)) => {
                if !s.couplings.is_empty() {
                    return Err(invalid("explicit couplings cannot be combined with a random system"));
                }
                if r.states == 0 {
                    return Err(invalid("random system needs at least one state"));
                }
                if !(r.energy_spread >= 0.0 && r.energy_spread.is_finite() && r.coupling >= 0.0 && r.coupling.is_finite()) {
                    return Err(invalid("random system spread and coupling must be nonnegative"));
                }
                random_system(r, self.seed)
            }
            _ => return Err(invalid("[system] needs exactly one of energies or random")),
        };
        let v = v * C64::new(s.coupling_scale, 0.0);
        SystemSpec::new(energies, v, s.hbar, window).map_err(|e| invalid(e.to_string()))
    }
}

fn random_system(r: &RandomSystem, seed: u64) -> (Vec<f64>, DMatrix<C64>) {
    let mut rng = sample_rng(seed, SYSTEM_STREAM);
    let energies = (0..r.states).map(|_| rng.random::<f64>() * r.energy_spread).collect();
    let mut v = random_hermitian(r.states, &mut rng) * C64::new(r.coupling, 0.0);
    for i in 0..r.states {
        v[(i, i)] = C64::new(0.0, 0.0);
    }
    (energies, v)
}

fn check_horizon(h: Horizon) -> Result<(), Failure> {
    match h {
        Horizon::Time(t) | Horizon::Gaps(t) => positive(t, "horizon"),
    }
}

pub fn initial_distribution(init: &Initial, dim: usize) -> Result<ProbabilityVector, Failure> {
    match init {
        Initial::State(k) => ProbabilityVector::delta(dim, *k),
        Initial::Probabilities(p) if p.len() == dim => ProbabilityVector::new(p.clone()),
        Initial::Probabilities(p) => {
            return Err(invalid(format!("initial distribution has {} entries for {dim} states", p.len())))
        }
    }
    .map_err(|e| invalid(e.to_string()))
}

pub fn scramble_period(p: &PeriodSpec, spec: &SystemSpec) -> Result<f64, Failure> {
    match p {
        PeriodSpec::Named(n) if n == "rate-matched" => Ok(2.0 * spec.dt()),
        PeriodSpec::Named(n) if n == "dt" => Ok(spec.dt()),
        PeriodSpec::Named(n) => Err(invalid(format!("unknown period {n:?}; use \"rate-matched\", \"dt\" or a time"))),
        PeriodSpec::Time(t) => positive(*t, "period").map(|_| *t),
    }
}

pub fn parse_propagator(s: &str) -> Result<dephase_core::master::Propagator, Failure> {
    match s {
        "full" => Ok(dephase_core::master::Propagator::Full),
        "smoothed" => Ok(dephase_core::master::Propagator::Smoothed),
        _ => Err(invalid(format!("unknown propagator {s:?}; use \"full\" or \"smoothed\""))),
    }
}

/// Largest Fock basis a config may request.
pub const MAX_BASIS: usize = 4_000_000;

fn validate_network(modes: &[ModeSpec], processes: &[ProcessSpec]) -> Result<(), Failure> {
    if modes.is_empty() {
        return Err(invalid("at least one mode is required"));
    }
    let mut dim: usize = 1;
    for m in modes {
        m.validate().map_err(|e| invalid(e.to_string()))?;
        dim = dim.saturating_mul(m.n_max + 1);
    }
    if dim > MAX_BASIS {
        return Err(invalid(format!("Fock basis of {dim} states exceeds the limit {MAX_BASIS}")));
    }
    for p in processes {
        p.validate(modes).map_err(|e| invalid(e.to_string()))?;
    }
    Ok(())
}

pub fn marginal(m: &MarginalSpec, mode: &ModeSpec) -> dephase_core::Result<Vec<f64>> {
    use dephase_core::kinetics::{bernoulli_marginal, geometric_marginal_with_mean, thermal_marginal};
    use dephase_core::Error;
    match (*m, mode.statistics) {
        (MarginalSpec::Fermion { f }, Statistics::Fermion) => bernoulli_marginal(f),
        (MarginalSpec::Geometric { mean }, Statistics::Boson) => geometric_marginal_with_mean(mean, mode.n_max),
        (MarginalSpec::Thermal { temperature }, Statistics::Boson) => thermal_marginal(mode.energy, temperature, mode.n_max),
        (MarginalSpec::Occupied { n }, _) if n <= mode.n_max => {
            let mut v = vec![0.0; mode.n_max + 1];
            v[n] = 1.0;
            Ok(v)
        }
        (m, s) => Err(Error::InvalidArgument(format!("marginal {m:?} does not fit a {s:?} mode with n_max {}", mode.n_max))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MASTER: &str = r#"
        scenario = "master"
        seed = 3
        [system]
        dt = 1.0
        energies = [0.0, 0.0]
        couplings = [{ i = 0, j = 1, re = 0.1 }]
        [master]
        horizon = { time = 10.0 }
    "#;

    #[test]
    fn parses_and_validates() {
        let c = ExperimentConfig::from_toml(MASTER).unwrap();
        c.validate().unwrap();
        assert_eq!(c.master.as_ref().unwrap().points, 21);
        let spec = c.system_spec().unwrap();
        assert_eq!(spec.interaction()[(1, 0)], C64::new(0.1, 0.0));
    }

    #[test]
    fn negative_dt_is_rejected() {
        let c = ExperimentConfig::from_toml(&MASTER.replace("dt = 1.0", "dt = -1.0")).unwrap();
        assert!(matches!(c.validate(), Err(Failure::Validation(_))));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_toml(&MASTER.replace("seed = 3", "seed = 3\nsead = 4")).is_err());
    }

    #[test]
    fn seed_is_required() {
        assert!(ExperimentConfig::from_toml(&MASTER.replace("seed = 3", "")).is_err());
    }

    #[test]
    fn sweep_values_are_applied() {
        let c = ExperimentConfig::from_toml(MASTER).unwrap();
        let d = c.with_sweep_value(SweepParameter::Dt, 0.25).unwrap();
        assert_eq!(d.system.unwrap().dt, Some(0.25));
        assert!(c.with_sweep_value(SweepParameter::NMax, 3.0).is_err());
        let empty = SweepSection { parameter: SweepParameter::Dt, values: vec![] };
        assert!(c.validate_sweep(&empty).is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = ExperimentConfig::from_toml(MASTER).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
