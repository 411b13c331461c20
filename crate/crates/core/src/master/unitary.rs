use nalgebra::DVector;

use super::SystemSpec;
use crate::ode::{self, StepControl};
use crate::spectral::{hermitian_exp_i, AmplitudeVector, UnitaryMatrix};
use crate::{Error, Result, C64};

/// Allowed drift of `sum |A|^2` over a unitary integration.
const NORM_TOL: f64 = 1e-9;

/// Interaction-picture amplitudes under the full oscillating coupling,
/// `dA_a/dt = -(i/hbar) sum_b V_ab exp(i (E_a - E_b) t / hbar) A_b`,
/// integrated from 0 to `t`.
pub fn evolve_unitary_reference(
    spec: &SystemSpec,
    a0: &AmplitudeVector,
    t: f64,
    control: &StepControl,
) -> Result<AmplitudeVector> {
    evolve_unitary_between(spec, a0, 0.0, t, control)
}

/// As [`evolve_unitary_reference`] but from `t0` to `t1`; `t1 < t0` runs the
/// same equation backwards, which recovers earlier amplitudes exactly up to
/// integration error.
pub fn evolve_unitary_between(
    spec: &SystemSpec,
    a: &AmplitudeVector,
    t0: f64,
    t1: f64,
    control: &StepControl,
) -> Result<AmplitudeVector> {
    let n = spec.dim();
    if a.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.dim() });
    }
    let v = spec.interaction();
    let energies = spec.energies();
    let inv_hbar = 1.0 / spec.hbar();

    let y0: Vec<f64> = a.as_slice().iter().flat_map(|z| [z.re, z.im]).collect();
    let mut rotated = vec![C64::new(0.0, 0.0); n];
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        // B_b = exp(-i E_b t / hbar) A_b, then dA_a = -(i/hbar) exp(i E_a t / hbar) (V B)_a.
        for b in 0..n {
            rotated[b] = C64::new(y[2 * b], y[2 * b + 1]) * C64::from_polar(1.0, -energies[b] * t * inv_hbar);
        }
        for i in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for (b, &rb) in rotated.iter().enumerate() {
                s += v[(i, b)] * rb;
            }
            let d = C64::new(0.0, -inv_hbar) * C64::from_polar(1.0, energies[i] * t * inv_hbar) * s;
            dy[2 * i] = d.re;
            dy[2 * i + 1] = d.im;
        }
    };
    let (y, _) = ode::integrate(rhs, t0, &y0, t1, control)?;
    let out = DVector::from_iterator(n, y.chunks_exact(2).map(|c| C64::new(c[0], c[1])));
    AmplitudeVector::with_tolerance(out, NORM_TOL).map_err(|e| match e {
        Error::NotNormalized(d) => Error::NoConvergence(format!("norm drifted by {d:e}; tighten the step control")),
        other => other,
    })
}

/// Smoothed dynamics: `A(t) = exp(-i V_shell t / hbar) A(0)`, keeping only
/// couplings inside the energy shell.
pub fn evolve_smoothed(spec: &SystemSpec, a0: &AmplitudeVector, t: f64) -> Result<AmplitudeVector> {
    let u = one_step_propagator(spec, t, Propagator::Smoothed);
    u.apply(a0)
}

/// Which unitary generates one step of the scrambling protocol.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Propagator {
    /// Full interaction-picture propagator with all oscillating phases,
    /// `exp(i H0 t / hbar) exp(-i H t / hbar)`.
    #[default]
    Full,
    /// Time-independent shell-restricted coupling.
    Smoothed,
}

/// Propagator over `[0, t]`.
///
/// For the full propagator the step starting at `t_k` differs only by
/// diagonal phases `exp(i H0 t_k / hbar)` on either side, which leave
/// `|U|^2` unchanged.
pub fn one_step_propagator(spec: &SystemSpec, t: f64, kind: Propagator) -> UnitaryMatrix {
    let hbar = spec.hbar();
    let m = match kind {
        Propagator::Full => {
            let u = hermitian_exp_i(&spec.hamiltonian(), -t / hbar);
            let mut out = u;
            for (i, &e) in spec.energies().iter().enumerate() {
                let phase = C64::from_polar(1.0, e * t / hbar);
                for x in out.row_mut(i).iter_mut() {
                    *x *= phase;
                }
            }
            out
        }
        Propagator::Smoothed => hermitian_exp_i(&spec.shell_interaction(), -t / hbar),
    };
    UnitaryMatrix::with_tolerance(m, 1e-9).expect("exponential of a Hermitian generator is unitary")
}
