use serde::Serialize;

use super::basis::{marginal, FockBasis};
use super::collision::collision_rhs;
use super::process::{build_kinetic_q, ProcessSpec};
use crate::spectral::ProbabilityVector;
use crate::{Error, Result};

/// Largest deviation of `P0` from the product of its marginals accepted as a
/// product state.
const PRODUCT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeConsistency {
    pub mode: usize,
    /// `d<n>/dt` at `t = 0` from the exact master equation.
    pub exact: f64,
    /// Collision integral evaluated at the marginal means.
    pub boltzmann: f64,
    pub discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub modes: Vec<ModeConsistency>,
    pub max_discrepancy: f64,
    /// Largest probability of a boson mode sitting at its cap.
    pub tail_mass: f64,
    /// Probability per unit time leaving the truncated basis at `t = 0`.
    pub truncation_flux: f64,
    pub dropped_transitions: usize,
}

/// Compares `d<n_m>/dt = sum_s n_m(s) (Q P0)_s` with the collision integrals
/// evaluated at the means of `P0`, which must be a product state.
pub fn verify_derivative_consistency(
    basis: &FockBasis,
    processes: &[ProcessSpec],
    p0: &ProbabilityVector,
) -> Result<ConsistencyReport> {
    if p0.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: p0.dim() });
    }
    let p = p0.as_slice();
    let marginals: Vec<Vec<f64>> = (0..basis.mode_count()).map(|m| marginal(p, basis, m)).collect();
    check_product(basis, p, &marginals)?;

    let rates = build_kinetic_q(basis, processes)?;
    let mut dp = vec![0.0; basis.dim()];
    rates.q.apply(p, &mut dp);

    let means: Vec<f64> =
        marginals.iter().map(|m| m.iter().enumerate().map(|(n, w)| n as f64 * w).sum()).collect();
    let rhs = collision_rhs(basis.modes(), processes, &means);

    let modes: Vec<ModeConsistency> = (0..basis.mode_count())
        .map(|m| {
            let exact: f64 = dp.iter().enumerate().map(|(s, d)| basis.occupation(s, m) as f64 * d).sum();
            ModeConsistency { mode: m, exact, boltzmann: rhs[m], discrepancy: (exact - rhs[m]).abs() }
        })
        .collect();
    let tail_mass = marginals
        .iter()
        .zip(basis.modes())
        .filter(|(_, spec)| !spec.is_fermion())
        .map(|(m, _)| *m.last().expect("nonempty marginal"))
        .fold(0.0, f64::max);
    Ok(ConsistencyReport {
        max_discrepancy: modes.iter().map(|m| m.discrepancy).fold(0.0, f64::max),
        modes,
        tail_mass,
        truncation_flux: rates.truncation.flux(p),
        dropped_transitions: rates.truncation.dropped_transitions,
    })
}

fn check_product(basis: &FockBasis, p: &[f64], marginals: &[Vec<f64>]) -> Result<()> {
    let mut worst = (0.0f64, 0);
    for (s, &w) in p.iter().enumerate() {
        let prod: f64 = marginals.iter().enumerate().map(|(i, m)| m[basis.occupation(s, i)]).product();
        let d = (w - prod).abs();
        if d > worst.0 {
            worst = (d, s);
        }
    }
    if worst.0 > PRODUCT_TOL {
        return Err(Error::NotProductState(format!(
            "P differs from the product of its marginals by {:e} at state {:?}",
            worst.0,
            basis.occupations(worst.1)
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::{bernoulli_marginal, geometric_marginal_with_mean, product_state, ModeSpec, ProcessKind};

    #[test]
    fn no_processes_means_no_motion() {
        let b = FockBasis::new(vec![ModeSpec::fermion(0.0), ModeSpec::boson(1.0, 5)]).unwrap();
        let p = product_state(&b, &[bernoulli_marginal(0.3).unwrap(), geometric_marginal_with_mean(0.5, 5).unwrap()])
            .unwrap();
        let rep = verify_derivative_consistency(&b, &[], &p).unwrap();
        assert!(rep.modes.iter().all(|m| m.exact == 0.0 && m.boltzmann == 0.0));
    }

    #[test]
    fn correlated_state_is_refused() {
        let b = FockBasis::new(vec![ModeSpec::fermion(0.0), ModeSpec::fermion(1.0)]).unwrap();
        let mut v = vec![0.0; 4];
        v[b.index_of(&[1, 0]).unwrap()] = 0.5;
        v[b.index_of(&[0, 1]).unwrap()] = 0.5;
        let p = ProbabilityVector::new(v).unwrap();
        assert!(matches!(verify_derivative_consistency(&b, &[], &p), Err(Error::NotProductState(_))));
    }

    #[test]
    fn small_fermion_boson_system() {
        let b = FockBasis::new(vec![ModeSpec::fermion(0.0), ModeSpec::fermion(0.5), ModeSpec::boson(0.5, 30)]).unwrap();
        let procs = [ProcessSpec::new(ProcessKind::FermionBoson { lower: 0, upper: 1, boson: 2 }, 0.4)];
        let p = product_state(
            &b,
            &[
                bernoulli_marginal(0.2).unwrap(),
                bernoulli_marginal(0.7).unwrap(),
                geometric_marginal_with_mean(0.5, 30).unwrap(),
            ],
        )
        .unwrap();
        let rep = verify_derivative_consistency(&b, &procs, &p).unwrap();
        assert!(rep.max_discrepancy < 1e-12, "{rep:?}");
    }
}
