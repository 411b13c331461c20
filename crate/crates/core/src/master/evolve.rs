use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::{build_q_matrix, stationary_analysis, RateMatrix, SystemSpec, Window};
use crate::ode::{self, StepControl};
use crate::spectral::{flush, ProbabilityVector};
use crate::{Error, Result};

/// Below this, a negative probability is rounding noise and is zeroed
/// silently; beyond it a warning is logged before zeroing.
const NEGATIVE_SLACK: f64 = 1e-14;

/// Uniformization rate as a multiple of the largest exit rate.
const UNIFORMIZATION_FACTOR: f64 = 1.1;
/// Poisson tail mass left out of each uniformization chunk.
const POISSON_TAIL: f64 = 1e-12;
/// Largest `Lambda tau` per chunk, keeping `exp(-Lambda tau)` well away from
/// underflow.
const CHUNK_EXPONENT: f64 = 30.0;

/// How `exp(Q t) P0` is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Method {
    /// Dense Pade scaling-and-squaring matrix exponential.
    #[default]
    Expm,
    /// Poisson-weighted powers of the uniformized chain; sparse.
    Uniformization,
    /// Adaptive Dormand-Prince integration of `dP/dt = Q P`; sparse.
    RungeKutta,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expm" => Ok(Self::Expm),
            "uniformization" => Ok(Self::Uniformization),
            "rk" | "runge-kutta" => Ok(Self::RungeKutta),
            _ => Err(Error::InvalidArgument(format!("unknown evolution method {s:?}"))),
        }
    }
}

/// `P(t) = exp(Q t) P0`. Negative `t` is refused.
pub fn evolve_master(q: &RateMatrix, p0: &ProbabilityVector, t: f64, method: Method) -> Result<ProbabilityVector> {
    let mut traj = evolve_master_trajectory(q, p0, &[t], method)?;
    Ok(traj.pop().expect("one time point"))
}

/// `exp(Q t_k) P0` at each of the nondecreasing `times`.
pub fn evolve_master_trajectory(
    q: &RateMatrix,
    p0: &ProbabilityVector,
    times: &[f64],
    method: Method,
) -> Result<Vec<ProbabilityVector>> {
    if p0.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), got: p0.dim() });
    }
    if let Some(&t) = times.iter().find(|&&t| t < 0.0) {
        return Err(Error::BackwardTime(t));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("non-finite evolution time".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("trajectory times must be nondecreasing".into()));
    }

    let mut out = Vec::with_capacity(times.len());
    let mut current = p0.as_slice().to_vec();
    let mut t_prev = 0.0;
    let mut dense: Option<DMatrix<f64>> = None;
    let mut propagators: HashMap<u64, DMatrix<f64>> = HashMap::new();

    for &t in times {
        let step = t - t_prev;
        if step > 0.0 && !q.is_zero() {
            current = match method {
                Method::Expm => {
                    let qd = dense.get_or_insert_with(|| q.to_dense());
                    let u = propagators.entry(step.to_bits()).or_insert_with(|| (&*qd * step).exp());
                    (&*u * DVector::from_column_slice(&current)).as_slice().to_vec()
                }
                Method::Uniformization => uniformization(q, &current, step),
                Method::RungeKutta => runge_kutta(q, &current, step)?,
            };
        }
        t_prev = t;
        out.push(finalize(current.clone())?);
        current = out.last().expect("pushed").as_slice().to_vec();
    }
    Ok(out)
}

fn finalize(mut v: Vec<f64>) -> Result<ProbabilityVector> {
    for (i, x) in v.iter_mut().enumerate() {
        *x = flush(*x);
        if *x < 0.0 {
            if *x < -NEGATIVE_SLACK {
                log::warn!("clamping probability {i} = {x:e} to zero");
            }
            *x = 0.0;
        }
    }
    ProbabilityVector::new(v).map_err(|e| Error::NoConvergence(format!("evolved vector left the simplex: {e}")))
}

fn uniformization(q: &RateMatrix, p: &[f64], t: f64) -> Vec<f64> {
    let lambda = UNIFORMIZATION_FACTOR * q.max_exit_rate();
    let chunks = ((lambda * t) / CHUNK_EXPONENT).ceil().max(1.0) as usize;
    let tau = t / chunks as f64;
    let mean = lambda * tau;
    let n = p.len();
    let mut x = p.to_vec();
    let mut v = vec![0.0; n];
    let mut qv = vec![0.0; n];
    let max_terms = (mean + 20.0 * mean.sqrt() + 100.0) as usize;

    for _ in 0..chunks {
        v.copy_from_slice(&x);
        let mut weight = (-mean).exp();
        let mut cumulative = weight;
        for (xi, &vi) in x.iter_mut().zip(&v) {
            *xi = weight * vi;
        }
        for k in 1..=max_terms {
            q.apply(&v, &mut qv);
            for (vi, &d) in v.iter_mut().zip(&qv) {
                *vi += d / lambda;
            }
            weight *= mean / k as f64;
            cumulative += weight;
            for (xi, &vi) in x.iter_mut().zip(&v) {
                *xi += weight * vi;
            }
            if k as f64 > mean && 1.0 - cumulative < POISSON_TAIL {
                break;
            }
        }
        // Give the truncated tail the last term's vector so probability is
        // conserved exactly; the error stays below the tail mass.
        let rest = 1.0 - cumulative;
        for (xi, &vi) in x.iter_mut().zip(&v) {
            *xi += rest * vi;
        }
    }
    x
}

fn runge_kutta(q: &RateMatrix, p: &[f64], t: f64) -> Result<Vec<f64>> {
    let ctl = StepControl { rtol: 1e-12, atol: 1e-15, ..StepControl::default() };
    ode::integrate(|_, y, dy| q.apply(y, dy), 0.0, p, t, &ctl).map(|(y, _)| y)
}

/// One entry of [`dt_sweep`].
#[derive(Clone, Debug)]
pub struct DtSweepPoint {
    pub dt: f64,
    pub half_width: f64,
    pub max_exit_rate: f64,
    pub spectral_gap: Option<f64>,
    pub trajectory: Vec<ProbabilityVector>,
    /// Sup-norm distance to the first sweep point's trajectory.
    pub deviation_from_first: f64,
}

/// Rebuilds the rate matrix for each coarse-graining step in `dts` and
/// evolves `p0` over `times`, so the dependence of the dynamics on `dt` can be
/// inspected directly.
pub fn dt_sweep(
    spec: &SystemSpec,
    p0: &ProbabilityVector,
    times: &[f64],
    dts: &[f64],
    method: Method,
) -> Result<Vec<DtSweepPoint>> {
    let mut points: Vec<DtSweepPoint> = Vec::with_capacity(dts.len());
    for &dt in dts {
        let s = spec.with_window(Window::Dt(dt))?;
        let q = build_q_matrix(&s);
        let trajectory = evolve_master_trajectory(&q, p0, times, method)?;
        let deviation_from_first = points.first().map_or(0.0, |first| {
            first.trajectory.iter().zip(&trajectory).map(|(a, b)| a.sup_distance(b)).fold(0.0, f64::max)
        });
        points.push(DtSweepPoint {
            dt,
            half_width: s.half_width(),
            max_exit_rate: q.max_exit_rate(),
            spectral_gap: stationary_analysis(&q).spectral_gap,
            trajectory,
            deviation_from_first,
        });
    }
    Ok(points)
}
