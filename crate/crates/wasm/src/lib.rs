//! Browser bindings: three small experiments whose results come back as
//! named columns of numbers, ready to plot.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use dephase_core::kinetics::{
    bernoulli_marginal, build_kinetic_q, evolve_boltzmann, mean_occupations, product_state, thermal_marginal,
    FockBasis, ModeSpec, ProcessKind, ProcessSpec,
};
use dephase_core::master::{
    build_q_matrix, evolve_master_trajectory, phase_scramble_evolution, Method, ScrambleSettings, SystemSpec, Window,
};
use dephase_core::spectral::{random_hermitian, ProbabilityVector};
use dephase_core::stats::sample_rng;
use dephase_core::timescale::{chi, chi_bar};
use dephase_core::C64;
use nalgebra::DMatrix;
use rand::Rng;
use wasm_bindgen::prelude::*;

/// Equal-length columns with a label each.
#[wasm_bindgen]
pub struct Curves {
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
}

#[wasm_bindgen]
impl Curves {
    pub fn count(&self) -> usize {
        self.columns.len()
    }

    pub fn label(&self, i: usize) -> String {
        self.labels.get(i).cloned().unwrap_or_default()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.columns.get(i).cloned().unwrap_or_default()
    }
}

impl Curves {
    fn new(labels: &[&str]) -> Self {
        Self { labels: labels.iter().map(|s| s.to_string()).collect(), columns: vec![Vec::new(); labels.len()] }
    }

    fn push(&mut self, row: &[f64]) {
        for (c, &x) in self.columns.iter_mut().zip(row) {
            c.push(x);
        }
    }
}

fn js(e: dephase_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Population of state 0 under the master equation and under periodic
/// phase scrambling, for a random system of `states` levels with `dt = 1`.
#[wasm_bindgen]
pub fn scramble_vs_master(
    states: usize,
    energy_spread: f64,
    coupling: f64,
    samples: usize,
    periods: usize,
    seed: u32,
) -> Result<Curves, JsError> {
    if !(2..=32).contains(&states) || samples == 0 || periods == 0 {
        return Err(JsError::new("need 2..=32 states, at least one sample and one period"));
    }
    let mut rng = sample_rng(seed as u64, u64::MAX);
    let energies: Vec<f64> = (0..states).map(|_| rng.random::<f64>() * energy_spread).collect();
    let mut v: DMatrix<C64> = random_hermitian(states, &mut rng) * C64::new(coupling, 0.0);
    for i in 0..states {
        v[(i, i)] = C64::new(0.0, 0.0);
    }
    let spec = SystemSpec::new(energies, v, 1.0, Window::Dt(1.0)).map_err(js)?;
    let settings = ScrambleSettings::rate_matched(&spec, samples, seed as u64);
    let p0 = ProbabilityVector::delta(states, 0).map_err(js)?;
    let scr = phase_scramble_evolution(&spec, &p0, periods as f64 * settings.period, &settings).map_err(js)?;
    let exact = evolve_master_trajectory(&build_q_matrix(&spec), &p0, &scr.times, Method::Expm).map_err(js)?;

    let mut out = Curves::new(&["t", "master", "scramble", "stderr"]);
    for (k, &t) in scr.times.iter().enumerate() {
        out.push(&[t, exact[k].as_slice()[0], scr.mean[k].as_slice()[0], scr.standard_error[k][0]]);
    }
    Ok(out)
}

/// `|chi|^2` and its box approximation over `[-extent W, extent W]`, `hbar = 1`.
#[wasm_bindgen]
pub fn window_curves(dt: f64, extent: f64, points: usize) -> Result<Curves, JsError> {
    if !(dt > 0.0 && extent > 0.0) || points < 2 {
        return Err(JsError::new("dt and extent must be positive, points at least 2"));
    }
    let w = std::f64::consts::PI / dt;
    let mut out = Curves::new(&["energy", "chi_abs_sq", "chi_bar"]);
    for k in 0..points {
        let e = extent * w * (2.0 * k as f64 / (points - 1) as f64 - 1.0);
        out.push(&[e, chi(e, dt, 1.0).norm_sqr(), chi_bar(e, dt, 1.0)]);
    }
    Ok(out)
}

/// A two-level emitter coupled to one boson mode of the same energy: mean
/// occupations from the exact many-body master equation and from the
/// Boltzmann equation, starting from a product state.
#[wasm_bindgen]
pub fn emitter_relaxation(
    f_upper: f64,
    temperature: f64,
    n_max: usize,
    horizon: f64,
    points: usize,
) -> Result<Curves, JsError> {
    if !(1..=200).contains(&n_max) || points < 2 || !(horizon > 0.0) {
        return Err(JsError::new("need 1 <= n_max <= 200, a positive horizon and at least 2 points"));
    }
    let modes = vec![ModeSpec::fermion(0.0), ModeSpec::fermion(1.0), ModeSpec::boson(1.0, n_max)];
    let processes = [ProcessSpec::new(ProcessKind::FermionBoson { lower: 0, upper: 1, boson: 2 }, 1.0)];
    let basis = FockBasis::new(modes.clone()).map_err(js)?;
    let marginals = vec![
        bernoulli_marginal(1.0 - f_upper).map_err(js)?,
        bernoulli_marginal(f_upper).map_err(js)?,
        thermal_marginal(1.0, temperature, n_max).map_err(js)?,
    ];
    let p0 = product_state(&basis, &marginals).map_err(js)?;
    let times: Vec<f64> = (0..points).map(|k| horizon * k as f64 / (points - 1) as f64).collect();
    let q = build_kinetic_q(&basis, &processes).map_err(js)?.q;
    let exact = evolve_master_trajectory(&q, &p0, &times, Method::Uniformization).map_err(js)?;
    let y0 = mean_occupations(&p0, &basis).map_err(js)?.values;
    let kinetic = evolve_boltzmann(&modes, &processes, &y0, &times).map_err(js)?;

    let mut out = Curves::new(&["t", "upper_exact", "upper_boltzmann", "boson_exact", "boson_boltzmann"]);
    for ((&t, p), y) in times.iter().zip(&exact).zip(&kinetic) {
        let m = mean_occupations(p, &basis).map_err(js)?.values;
        out.push(&[t, m[1], y[1], m[2], y[2]]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_peaks_at_zero_energy() {
        let c = window_curves(1.0, 2.0, 101).ok().unwrap();
        let abs = c.column(1);
        assert!((abs[50] - 1.0).abs() < 1e-12);
        assert!(abs.iter().all(|&x| x <= 1.0 + 1e-12));
    }

    #[test]
    fn emitter_starts_from_the_product_state() {
        let c = emitter_relaxation(0.8, 1.0, 20, 2.0, 5).ok().unwrap();
        assert!((c.column(1)[0] - 0.8).abs() < 1e-12);
        assert!((c.column(1)[0] - c.column(2)[0]).abs() < 1e-12);
    }

    #[test]
    fn scramble_tracks_master_for_weak_coupling() {
        let c = scramble_vs_master(6, 0.02, 0.02, 400, 10, 7).ok().unwrap();
        let dev = c.column(1).iter().zip(&c.column(2)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 0.05, "{dev}");
    }
}
