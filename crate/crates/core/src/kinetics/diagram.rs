use serde::{Deserialize, Serialize};

use super::basis::FockBasis;
use super::collision::boltzmann_fixed_point;
use super::process::{build_kinetic_q, ProcessSpec, ENERGY_TOL};
use crate::master::{evolve_master, stationary_analysis, Method};
use crate::spectral::ProbabilityVector;
use crate::{Error, Result};

/// Relaxation horizon of the exact path, in units of the inverse spectral
/// gap.
const HORIZON_GAPS: f64 = 20.0;

/// Which fixed-energy subspace to examine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShellSelector {
    /// Every basis state of this total energy; disconnected parts are
    /// reported separately.
    Energy(f64),
    /// The connected part of the shell containing this occupation tuple.
    State(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentCommutativity {
    pub size: usize,
    /// Occupations of the lowest-indexed state, which seeds both paths.
    pub representative: Vec<usize>,
    pub spectral_gap: Option<f64>,
    pub horizon: f64,
    /// Exact path: means after relaxing the master equation to `horizon`.
    pub path_a: Vec<f64>,
    /// Means of the uniform distribution over the component.
    pub uniform_means: Vec<f64>,
    /// `sup |P(horizon) - uniform|`.
    pub stationarity_error: f64,
    /// Kinetic path: fixed point of the Boltzmann equations.
    pub path_b: Vec<f64>,
    pub fixed_point_residual: f64,
    /// `sup |path_a - path_b|`.
    pub gap: f64,
    /// Probability per unit time that the uniform distribution would leave
    /// the truncated basis.
    pub truncation_flux: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutativityReport {
    pub energy: f64,
    pub shell_size: usize,
    pub components: Vec<ComponentCommutativity>,
}

impl CommutativityReport {
    pub fn max_gap(&self) -> f64 {
        self.components.iter().map(|c| c.gap).fold(0.0, f64::max)
    }
}

/// Compares the two routes from a microstate to equilibrium means: relaxing
/// the exact master equation on the energy shell and averaging occupations,
/// against averaging first and relaxing the Boltzmann equations.
///
/// The two agree only as the number of modes and occupation caps grow; the
/// report gives the gap rather than asserting it is small.
pub fn diagram_commutativity(
    basis: &FockBasis,
    processes: &[ProcessSpec],
    selector: &ShellSelector,
) -> Result<CommutativityReport> {
    let seed = match selector {
        ShellSelector::Energy(_) => None,
        ShellSelector::State(occ) => Some(basis.index_of(occ).ok_or_else(|| {
            Error::InvalidArgument(format!("occupations {occ:?} are not a state of the basis"))
        })?),
    };
    let energy = match (selector, seed) {
        (ShellSelector::Energy(e), _) => *e,
        (_, Some(s)) => basis.total_energy(s),
        _ => unreachable!(),
    };
    let shell: Vec<usize> = (0..basis.dim()).filter(|&s| (basis.total_energy(s) - energy).abs() <= ENERGY_TOL).collect();
    if shell.is_empty() {
        return Err(Error::InvalidArgument(format!("no basis state has total energy {energy}")));
    }

    let rates = build_kinetic_q(basis, processes)?;
    let q_shell = rates.q.restrict(&shell);
    let (count, labels) = q_shell.components();

    let mut components = Vec::new();
    for c in 0..count {
        let local: Vec<usize> = (0..shell.len()).filter(|&k| labels[k] == c).collect();
        let states: Vec<usize> = local.iter().map(|&k| shell[k]).collect();
        if let Some(s) = seed {
            if !states.contains(&s) {
                continue;
            }
        }
        let q = q_shell.restrict(&local);
        let n = states.len();
        let means_of = |p: &[f64]| -> Vec<f64> {
            (0..basis.mode_count())
                .map(|m| states.iter().zip(p).map(|(&s, w)| basis.occupation(s, m) as f64 * w).sum())
                .collect()
        };

        let uniform = ProbabilityVector::uniform(n)?;
        let spectral_gap = stationary_analysis(&q).spectral_gap;
        let horizon = spectral_gap.map_or(0.0, |g| HORIZON_GAPS / g);
        let relaxed = evolve_master(&q, &ProbabilityVector::delta(n, 0)?, horizon, Method::Uniformization)?;
        let path_a = means_of(relaxed.as_slice());
        let uniform_means = means_of(uniform.as_slice());

        let representative = basis.occupations(states[0]);
        let y0: Vec<f64> = representative.iter().map(|&k| k as f64).collect();
        let fp = boltzmann_fixed_point(basis.modes(), processes, &y0)?;
        let gap = path_a.iter().zip(&fp.means).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

        let mut full = vec![0.0; basis.dim()];
        for &s in &states {
            full[s] = 1.0 / n as f64;
        }
        components.push(ComponentCommutativity {
            size: n,
            representative,
            spectral_gap,
            horizon,
            stationarity_error: relaxed.sup_distance(&uniform),
            path_a,
            uniform_means,
            path_b: fp.means,
            fixed_point_residual: fp.residual,
            gap,
            truncation_flux: rates.truncation.flux(&full),
        });
    }
    Ok(CommutativityReport { energy, shell_size: shell.len(), components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::{ModeSpec, ProcessKind};

    #[test]
    fn single_state_shell_is_exact() {
        let b = FockBasis::new(vec![ModeSpec::fermion(0.0), ModeSpec::fermion(1.0), ModeSpec::boson(1.0, 3)]).unwrap();
        let procs = [ProcessSpec::new(ProcessKind::FermionBoson { lower: 0, upper: 1, boson: 2 }, 1.0)];
        let rep = diagram_commutativity(&b, &procs, &ShellSelector::State(vec![1, 0, 0])).unwrap();
        assert_eq!(rep.components.len(), 1);
        let c = &rep.components[0];
        assert_eq!(c.size, 1);
        assert_eq!(c.path_a, vec![1.0, 0.0, 0.0]);
        assert_eq!(c.path_b, vec![1.0, 0.0, 0.0]);
        assert_eq!(c.gap, 0.0);
    }

    #[test]
    fn two_level_emitter_shell() {
        let b = FockBasis::new(vec![ModeSpec::fermion(0.0), ModeSpec::fermion(1.0), ModeSpec::boson(1.0, 4)]).unwrap();
        let procs = [ProcessSpec::new(ProcessKind::FermionBoson { lower: 0, upper: 1, boson: 2 }, 1.0)];
        let rep = diagram_commutativity(&b, &procs, &ShellSelector::State(vec![0, 1, 2])).unwrap();
        let c = &rep.components[0];
        // <0,1,2> <-> <1,0,3>: uniform over the pair.
        assert_eq!(c.size, 2);
        for (a, u) in c.path_a.iter().zip(&c.uniform_means) {
            assert!((a - u).abs() < 1e-8);
        }
        assert!((c.uniform_means[0] - 0.5).abs() < 1e-15);
        assert!(c.fixed_point_residual < 1e-12);
    }

    #[test]
    fn energy_selector_reports_every_component() {
        let b = FockBasis::new(vec![ModeSpec::fermion(0.0), ModeSpec::fermion(1.0), ModeSpec::boson(1.0, 2)]).unwrap();
        let rep = diagram_commutativity(&b, &[], &ShellSelector::Energy(1.0)).unwrap();
        // The lower level has zero energy: <0,0,1>, <0,1,0>, <1,0,1>, <1,1,0>.
        assert_eq!(rep.shell_size, 4);
        assert_eq!(rep.components.len(), 4);
        assert!(diagram_commutativity(&b, &[], &ShellSelector::Energy(7.5)).is_err());
    }
}
