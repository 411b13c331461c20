use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::basis::{ModeSpec, Statistics};
use super::process::ProcessSpec;
use crate::ode::{self, StepControl};
use crate::{Error, Result};

/// `1 / (exp((e - mu) / T) + 1)`.
pub fn fermi_dirac(energy: f64, mu: f64, temperature: f64) -> f64 {
    let x = (energy - mu) / temperature;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (x.exp() + 1.0)
    }
}

/// `1 / (exp(E / T) - 1)` for `E > 0`.
pub fn bose_einstein(energy: f64, temperature: f64) -> f64 {
    1.0 / (energy / temperature).exp_m1()
}

fn check_fermion(f: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {f} outside [0, 1]")))
    }
}

fn check_boson(n: f64, name: &str) -> Result<()> {
    if n >= 0.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {n} must be nonnegative")))
    }
}

/// `df1/dt = q [(1 - f1) f2 (N + 1) - f1 (1 - f2) N]` for the lower level 1,
/// upper level 2 and the boson mode bridging them.
pub fn boltzmann_rhs_fermion_boson(f1: f64, f2: f64, n: f64, q: f64) -> Result<f64> {
    check_fermion(f1, "f1")?;
    check_fermion(f2, "f2")?;
    check_boson(n, "N")?;
    check_boson(q, "q")?;
    Ok(q * ((1.0 - f1) * f2 * (n + 1.0) - f1 * (1.0 - f2) * n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ThreePhononChannel {
    /// Mode 1 merges with mode 2 into mode 3.
    Merge,
    /// Mode 1 decays into modes 2 and 3.
    Decay,
}

/// `dN1/dt` for a three-phonon process involving modes 1, 2 and 3.
pub fn boltzmann_rhs_three_phonon(n1: f64, n2: f64, n3: f64, q: f64, channel: ThreePhononChannel) -> Result<f64> {
    check_boson(n1, "N1")?;
    check_boson(n2, "N2")?;
    check_boson(n3, "N3")?;
    check_boson(q, "q")?;
    Ok(match channel {
        ThreePhononChannel::Merge => q * (n1 + 1.0) * (n2 + 1.0) * n3 - q * n1 * n2 * (n3 + 1.0),
        ThreePhononChannel::Decay => q * (n1 + 1.0) * n2 * n3 - q * n1 * (n2 + 1.0) * (n3 + 1.0),
    })
}

#[inline]
fn in_factor(y: f64, stats: Statistics) -> (f64, f64) {
    match stats {
        Statistics::Boson => (y + 1.0, 1.0),
        Statistics::Fermion => (1.0 - y, -1.0),
    }
}

/// Forward minus backward flux of each process at mean occupations `y`, and
/// the gross flux (forward plus backward) used to scale residuals.
pub fn net_fluxes(modes: &[ModeSpec], processes: &[ProcessSpec], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    processes
        .iter()
        .map(|p| {
            let (cons, prod, nc, np) = p.consumed_produced();
            let (cons, prod) = (&cons[..nc], &prod[..np]);
            let fwd: f64 = cons.iter().map(|&m| y[m]).product::<f64>()
                * prod.iter().map(|&m| in_factor(y[m], modes[m].statistics).0).product::<f64>();
            let bwd: f64 = prod.iter().map(|&m| y[m]).product::<f64>()
                * cons.iter().map(|&m| in_factor(y[m], modes[m].statistics).0).product::<f64>();
            (p.rate * (fwd - bwd), p.rate * (fwd + bwd))
        })
        .unzip()
}

/// Collision integrals of all `processes`: `dy_m/dt` for every mode under the
/// independence assumption.
pub fn collision_rhs(modes: &[ModeSpec], processes: &[ProcessSpec], y: &[f64]) -> Vec<f64> {
    let mut dy = vec![0.0; modes.len()];
    collision_rhs_into(modes, processes, y, &mut dy);
    dy
}

fn collision_rhs_into(modes: &[ModeSpec], processes: &[ProcessSpec], y: &[f64], dy: &mut [f64]) {
    dy.iter_mut().for_each(|d| *d = 0.0);
    let (net, _) = net_fluxes(modes, processes, y);
    for (p, f) in processes.iter().zip(net) {
        let (cons, prod, nc, np) = p.consumed_produced();
        cons[..nc].iter().for_each(|&m| dy[m] -= f);
        prod[..np].iter().for_each(|&m| dy[m] += f);
    }
}

fn validate(modes: &[ModeSpec], processes: &[ProcessSpec], y: &[f64]) -> Result<()> {
    if y.len() != modes.len() {
        return Err(Error::DimensionMismatch { expected: modes.len(), got: y.len() });
    }
    for p in processes {
        p.validate(modes)?;
    }
    for (i, (&v, m)) in y.iter().zip(modes).enumerate() {
        match m.statistics {
            Statistics::Fermion => check_fermion(v, &format!("f[{i}]"))?,
            Statistics::Boson => check_boson(v, &format!("N[{i}]"))?,
        }
    }
    Ok(())
}

/// Integrates the Boltzmann equations (no occupation caps) from `y0` and
/// returns the means at each nondecreasing time in `times`.
pub fn evolve_boltzmann(
    modes: &[ModeSpec],
    processes: &[ProcessSpec],
    y0: &[f64],
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    validate(modes, processes, y0)?;
    if let Some(&t) = times.iter().find(|&&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument(format!("invalid time {t}")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be nondecreasing".into()));
    }
    let ctl = StepControl { rtol: 1e-12, atol: 1e-15, ..StepControl::default() };
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0.to_vec();
    let mut t_prev = 0.0;
    for &t in times {
        if t > t_prev {
            y = ode::integrate(|_, y, dy| collision_rhs_into(modes, processes, y, dy), t_prev, &y, t, &ctl)?.0;
        }
        t_prev = t;
        out.push(y.clone());
    }
    Ok(out)
}

/// Stationary means of the Boltzmann equations on the invariant manifold of
/// the starting point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPoint {
    pub means: Vec<f64>,
    /// Largest `|dy/dt|` at `means`.
    pub residual: f64,
    pub iterations: usize,
}

const NEWTON_MAX_ITER: usize = 200;
const NEWTON_REL_TOL: f64 = 1e-14;

/// Fixed point reachable from `y0`.
///
/// The collision integrals only move `y` along the stoichiometry vectors of
/// the processes, so the fixed point is sought as `y0 + S xi` with every
/// process in detailed balance. Damped Gauss-Newton on `xi`, with steps
/// shortened to keep occupations physical; if that stalls, the equations are
/// integrated forward first and the iteration restarted from there.
pub fn boltzmann_fixed_point(modes: &[ModeSpec], processes: &[ProcessSpec], y0: &[f64]) -> Result<FixedPoint> {
    validate(modes, processes, y0)?;
    let residual = |y: &[f64]| collision_rhs(modes, processes, y).iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if processes.is_empty() {
        return Ok(FixedPoint { means: y0.to_vec(), residual: 0.0, iterations: 0 });
    }
    let q_max = processes.iter().map(|p| p.rate).fold(0.0, f64::max);
    let mut start = y0.to_vec();
    let mut total_iter = 0;
    let mut relax_time = 1.0 / q_max.max(f64::MIN_POSITIVE);
    for _ in 0..12 {
        match newton(modes, processes, &start) {
            Ok((means, it)) => {
                total_iter += it;
                let r = residual(&means);
                return Ok(FixedPoint { means, residual: r, iterations: total_iter });
            }
            Err(it) => {
                total_iter += it;
                log::debug!("Newton stalled; relaxing for {relax_time:e} before retrying");
                start = evolve_boltzmann(modes, processes, &start, &[relax_time])?.pop().expect("one time");
                relax_time *= 2.0;
            }
        }
    }
    Err(Error::NoConvergence("Boltzmann fixed point not found".into()))
}

fn feasible(modes: &[ModeSpec], y: &[f64]) -> bool {
    y.iter().zip(modes).all(|(&v, m)| match m.statistics {
        Statistics::Boson => v >= 0.0,
        Statistics::Fermion => (0.0..=1.0).contains(&v),
    })
}

fn scaled_residual(modes: &[ModeSpec], processes: &[ProcessSpec], y: &[f64]) -> (Vec<f64>, f64) {
    let (net, gross) = net_fluxes(modes, processes, y);
    let worst = net.iter().zip(&gross).map(|(n, g)| if *g > 0.0 { n.abs() / g } else { 0.0 }).fold(0.0, f64::max);
    (net, worst)
}

fn newton(modes: &[ModeSpec], processes: &[ProcessSpec], y0: &[f64]) -> std::result::Result<(Vec<f64>, usize), usize> {
    let m = modes.len();
    let np = processes.len();
    let s = DMatrix::from_fn(m, np, |i, p| processes[p].stoichiometry(i));
    let mut y = y0.to_vec();
    let norm = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();

    for it in 0..NEWTON_MAX_ITER {
        let (r, worst) = scaled_residual(modes, processes, &y);
        if worst <= NEWTON_REL_TOL {
            return Ok((y, it));
        }
        let j = jacobian(modes, processes, &y) * &s;
        let Ok(delta) = j.svd(true, true).solve(&DVector::from_column_slice(&r), 1e-14) else {
            return Err(it);
        };
        let dy = &s * (-delta);
        let r0 = norm(&r);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = y.iter().zip(dy.iter()).map(|(a, d)| a + alpha * d).collect();
            if feasible(modes, &trial) && norm(&net_fluxes(modes, processes, &trial).0) < r0 {
                y = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // No decrease is possible within rounding: accept if already
            // balanced to near machine precision.
            return if worst <= 1e-12 { Ok((y, it)) } else { Err(it) };
        }
    }
    Err(NEWTON_MAX_ITER)
}

/// `d(net flux_p)/d y_m`.
fn jacobian(modes: &[ModeSpec], processes: &[ProcessSpec], y: &[f64]) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(processes.len(), modes.len());
    for (row, p) in processes.iter().enumerate() {
        let (cons, prod, nc, np) = p.consumed_produced();
        let (cons, prod) = (&cons[..nc], &prod[..np]);
        // Each term is a product of factors linear in one mode each.
        let mut add_term = |out: &[usize], inn: &[usize], sign: f64| {
            let factors: Vec<(usize, f64, f64)> = out
                .iter()
                .map(|&k| (k, y[k], 1.0))
                .chain(inn.iter().map(|&k| {
                    let (v, slope) = in_factor(y[k], modes[k].statistics);
                    (k, v, slope)
                }))
                .collect();
            for (i, &(k, _, slope)) in factors.iter().enumerate() {
                let others: f64 = factors.iter().enumerate().filter(|&(l, _)| l != i).map(|(_, f)| f.1).product();
                j[(row, k)] += sign * p.rate * slope * others;
            }
        };
        add_term(cons, prod, 1.0);
        add_term(prod, cons, -1.0);
    }
    j
}
