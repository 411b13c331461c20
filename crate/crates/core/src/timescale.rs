//! Window function of the coarse-graining step and applicability estimates.
//!
//! Integrating `exp(i dE t / hbar)` over a step `dt` and dividing by `dt`
//! gives the window `chi(dE)`, equal to one at `dE = 0` and decaying like
//! `1/dE`. It is replaced by the box `chi_bar`, one for `|dE| < pi hbar / dt`,
//! whose width is fixed by equal `L^2` norms: both integrate to
//! `2 pi hbar / dt`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::master::{build_q_matrix, SystemSpec};
use crate::quadrature;
use crate::{Error, Result, C64};

/// Default separation factor standing in for "much less than".
pub const DEFAULT_MARGIN: f64 = 10.0;

/// Number of full periods of `|chi|^2` integrated numerically before the
/// asymptotic tail takes over.
const QUADRATURE_PERIODS: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowParams {
    dt: f64,
    hbar: f64,
}

impl WindowParams {
    pub fn new(dt: f64, hbar: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt = {dt} and hbar = {hbar} must be positive")));
        }
        Ok(Self { dt, hbar })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `W = pi hbar / dt`.
    pub fn half_width(&self) -> f64 {
        PI * self.hbar / self.dt
    }
}

/// `chi(dE) = (1/dt) (-i hbar / dE) (exp(i dE dt / hbar) - 1)`, with
/// `chi(0) = 1`.
pub fn chi(delta_e: f64, dt: f64, hbar: f64) -> C64 {
    let x = delta_e * dt / hbar;
    if x == 0.0 {
        return C64::new(1.0, 0.0);
    }
    // exp(ix) - 1 = -2 sin^2(x/2) + i sin x, without cancellation near 0.
    let half = (0.5 * x).sin();
    C64::new(x.sin() / x, 2.0 * half * half / x)
}

/// Box window: 1 for `|dE| < pi hbar / dt`, 0 otherwise (boundary included
/// in the zero region).
pub fn chi_bar(delta_e: f64, dt: f64, hbar: f64) -> f64 {
    if delta_e.abs() * dt < PI * hbar {
        1.0
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormIntegral {
    pub value: f64,
    pub error_estimate: f64,
}

/// `int |chi(E)|^2 dE` over the real line by adaptive quadrature.
///
/// The first [`QUADRATURE_PERIODS`] periods are integrated numerically; the
/// remainder uses the asymptotic expansion
/// `int_L^inf 2 (1 - cos x) / x^2 dx = 2/L - 4/L^3 + O(L^-5)` at `L = 2 pi K`.
pub fn chi_sq_integral(dt: f64, hbar: f64) -> Result<NormIntegral> {
    let w = WindowParams::new(dt, hbar)?;
    let period = 2.0 * PI * w.hbar / w.dt;
    let integrand = |e: f64| chi(e, w.dt, w.hbar).norm_sqr();
    let mut value = 0.0;
    let mut error = 0.0;
    for k in 0..QUADRATURE_PERIODS {
        let q = quadrature::integrate(integrand, k as f64 * period, (k + 1) as f64 * period, 1e-17 * period, 1e-15, 200);
        value += q.value;
        error += q.error;
    }
    let l = 2.0 * PI * QUADRATURE_PERIODS as f64;
    let tail = (2.0 / l - 4.0 / l.powi(3)) * w.hbar / w.dt;
    error += 24.0 / l.powi(5) * w.hbar / w.dt;
    Ok(NormIntegral { value: 2.0 * (value + tail), error_estimate: 2.0 * error })
}

/// `int |chi_bar(E)|^2 dE` by adaptive quadrature over `[-2W, 2W]`, split at
/// the box edges.
pub fn chi_bar_sq_integral(dt: f64, hbar: f64) -> Result<NormIntegral> {
    let w = WindowParams::new(dt, hbar)?;
    let hw = w.half_width();
    let integrand = |e: f64| chi_bar(e, w.dt, w.hbar).powi(2);
    let mut value = 0.0;
    let mut error = 0.0;
    for (a, b) in [(-2.0 * hw, -hw), (-hw, hw), (hw, 2.0 * hw)] {
        let q = quadrature::integrate(integrand, a, b, 1e-15 * hw, 1e-15, 200);
        value += q.value;
        error += q.error;
    }
    Ok(NormIntegral { value, error_estimate: error })
}

/// Applicability of the coarse-graining step for a system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimescaleReport {
    pub dt: f64,
    pub hbar: f64,
    pub half_width: f64,
    /// Longest oscillation period `hbar / |dE|` among coupled pairs outside
    /// the shell; zero when there are none.
    pub t_max: f64,
    /// `min hbar / |V_ab|` over nonzero couplings.
    pub t_a_amplitude: f64,
    /// `min 1 / |Q_aa|` over states with a nonzero exit rate.
    pub t_a_rate: f64,
    /// `min(t_a_amplitude, t_a_rate)`.
    pub t_a: f64,
    pub required_margin: f64,
    /// `min(dt / t_max, t_a / dt)`.
    pub achieved_margin: f64,
    pub admissible: bool,
    pub note: String,
}

/// Checks `t_max * margin <= dt <= t_a / margin`.
pub fn applicability_window(spec: &SystemSpec, margin: f64) -> Result<TimescaleReport> {
    if !(margin >= 1.0 && margin.is_finite()) {
        return Err(Error::InvalidArgument(format!("margin must be at least 1, got {margin}")));
    }
    let n = spec.dim();
    let hbar = spec.hbar();
    let dt = spec.dt();
    let v = spec.interaction();

    let mut min_gap = f64::INFINITY;
    let mut max_coupling: f64 = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let c = v[(a, b)].norm();
            if c == 0.0 {
                continue;
            }
            max_coupling = max_coupling.max(c);
            let gap = (spec.energies()[a] - spec.energies()[b]).abs();
            if !spec.in_shell(a, b) && gap > 0.0 {
                min_gap = min_gap.min(gap);
            }
        }
    }
    let t_max = if min_gap.is_finite() { hbar / min_gap } else { 0.0 };
    let t_a_amplitude = if max_coupling > 0.0 { hbar / max_coupling } else { f64::INFINITY };
    let max_exit = build_q_matrix(spec).max_exit_rate();
    let t_a_rate = if max_exit > 0.0 { 1.0 / max_exit } else { f64::INFINITY };
    let t_a = t_a_amplitude.min(t_a_rate);

    let lower = if t_max > 0.0 { dt / t_max } else { f64::INFINITY };
    let achieved_margin = lower.min(t_a / dt);
    let admissible = t_max * margin <= dt && dt <= t_a / margin;

    let note = if t_max > 0.0 {
        "t_max is the longest period among coupled pairs outside the energy shell".to_string()
    } else {
        "no coupled pairs outside the energy shell; only the upper bound applies".to_string()
    };
    Ok(TimescaleReport {
        dt,
        hbar,
        half_width: spec.half_width(),
        t_max,
        t_a_amplitude,
        t_a_rate,
        t_a,
        required_margin: margin,
        achieved_margin,
        admissible,
        note,
    })
}
