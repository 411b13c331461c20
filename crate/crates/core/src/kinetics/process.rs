use serde::{Deserialize, Serialize};

use super::basis::{FockBasis, ModeSpec, Statistics};
use crate::master::RateMatrix;
use crate::{Error, Result};

/// Energy mismatch tolerated by the conservation check of a process.
pub const ENERGY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProcessKind {
    /// A fermion drops from `upper` to `lower` emitting a boson into `boson`,
    /// and the reverse absorption.
    FermionBoson { lower: usize, upper: usize, boson: usize },
    /// Bosons in `a` and `b` merge into one in `c`, and the reverse split.
    Merge { a: usize, b: usize, c: usize },
    /// A boson in `source` decays into one in `a` and one in `b`, and the
    /// reverse merge.
    Decay { source: usize, a: usize, b: usize },
}

/// A process with its base rate `q` (`2 pi |V|^2 nu / hbar` for a coupling to
/// a continuum); occupation factors are applied on top.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    #[serde(flatten)]
    pub kind: ProcessKind,
    pub rate: f64,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, rate: f64) -> Self {
        Self { kind, rate }
    }

    /// Modes destroyed and created by one forward event.
    pub fn consumed_produced(&self) -> ([usize; 2], [usize; 2], usize, usize) {
        match self.kind {
            ProcessKind::FermionBoson { lower, upper, boson } => ([upper, 0], [lower, boson], 1, 2),
            ProcessKind::Merge { a, b, c } => ([a, b], [c, 0], 2, 1),
            ProcessKind::Decay { source, a, b } => ([source, 0], [a, b], 1, 2),
        }
    }

    fn modes(&self) -> Vec<usize> {
        let (c, p, nc, np) = self.consumed_produced();
        c[..nc].iter().chain(&p[..np]).copied().collect()
    }

    /// Checks mode indices, statistics, distinctness, the rate and energy
    /// conservation against `modes`.
    pub fn validate(&self, modes: &[ModeSpec]) -> Result<()> {
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::InvalidProcess(format!("base rate {} must be nonnegative", self.rate)));
        }
        let involved = self.modes();
        if let Some(&m) = involved.iter().find(|&&m| m >= modes.len()) {
            return Err(Error::InvalidProcess(format!("mode {m} does not exist ({} modes)", modes.len())));
        }
        for (i, a) in involved.iter().enumerate() {
            if involved[i + 1..].contains(a) {
                return Err(Error::InvalidProcess(format!("mode {a} appears twice in {:?}", self.kind)));
            }
        }
        let need = |m: usize, s: Statistics, role: &str| {
            if modes[m].statistics == s {
                Ok(())
            } else {
                Err(Error::InvalidProcess(format!("{role} mode {m} must be a {s:?}, got {:?}", modes[m].statistics)))
            }
        };
        match self.kind {
            ProcessKind::FermionBoson { lower, upper, boson } => {
                need(lower, Statistics::Fermion, "lower")?;
                need(upper, Statistics::Fermion, "upper")?;
                need(boson, Statistics::Boson, "boson")?;
            }
            _ => {
                for &m in &involved {
                    need(m, Statistics::Boson, "phonon")?;
                }
            }
        }
        let mismatch = self.energy_change(modes);
        if mismatch.abs() > ENERGY_TOL {
            return Err(Error::InvalidProcess(format!("{:?} changes the energy by {mismatch:e}", self.kind)));
        }
        Ok(())
    }

    /// Energy created minus energy destroyed by one forward event.
    pub fn energy_change(&self, modes: &[ModeSpec]) -> f64 {
        let (c, p, nc, np) = self.consumed_produced();
        p[..np].iter().map(|&m| modes[m].energy).sum::<f64>() - c[..nc].iter().map(|&m| modes[m].energy).sum::<f64>()
    }

    /// `+1` for produced modes, `-1` for consumed ones, `0` otherwise.
    pub fn stoichiometry(&self, mode: usize) -> f64 {
        let (c, p, nc, np) = self.consumed_produced();
        if c[..nc].contains(&mode) {
            -1.0
        } else if p[..np].contains(&mode) {
            1.0
        } else {
            0.0
        }
    }
}

/// Rate lost to transitions that would push a boson past its cap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationFlux {
    pub dropped_transitions: usize,
    /// Dropped exit rate per basis state.
    #[serde(skip)]
    pub dropped_rate: Vec<f64>,
}

impl TruncationFlux {
    /// Probability per unit time that `p` would leave the truncated basis.
    pub fn flux(&self, p: &[f64]) -> f64 {
        self.dropped_rate.iter().zip(p).map(|(r, w)| r * w).sum()
    }
}

#[derive(Clone, Debug)]
pub struct KineticRates {
    pub q: RateMatrix,
    pub truncation: TruncationFlux,
}

/// Occupation factor for taking one particle out of a mode holding `n`.
#[inline]
fn out_factor(n: usize) -> f64 {
    n as f64
}

/// Occupation factor for adding one particle to a mode holding `n`: `n + 1`
/// for bosons, `1 - n` for fermions (zero when blocked).
#[inline]
fn in_factor(n: usize, stats: Statistics) -> f64 {
    match stats {
        Statistics::Boson => n as f64 + 1.0,
        Statistics::Fermion => 1.0 - n as f64,
    }
}

/// Many-body rate matrix of `processes` on `basis`.
///
/// A forward event from a state with occupations `n` has rate
/// `q prod_consumed n_i prod_produced (n_j + 1)` (with `1 - n_j` for a
/// fermion); the reverse event between the same two states has the same
/// rate. Events whose target exceeds a boson cap are dropped and accounted in
/// the returned [`TruncationFlux`].
pub fn build_kinetic_q(basis: &FockBasis, processes: &[ProcessSpec]) -> Result<KineticRates> {
    for p in processes {
        p.validate(basis.modes())?;
    }
    let modes = basis.modes();
    let mut pairs = Vec::new();
    let mut dropped_rate = vec![0.0; basis.dim()];
    let mut dropped_transitions = 0;

    for proc in processes {
        let (cons, prod, nc, np) = proc.consumed_produced();
        let (cons, prod) = (&cons[..nc], &prod[..np]);
        let shift: isize = prod.iter().map(|&m| basis.stride(m) as isize).sum::<isize>()
            - cons.iter().map(|&m| basis.stride(m) as isize).sum::<isize>();
        for s in 0..basis.dim() {
            // Forward event from `s`.
            let mut rate = proc.rate;
            let mut overflow = false;
            for &m in cons {
                rate *= out_factor(basis.occupation(s, m));
            }
            for &m in prod {
                let n = basis.occupation(s, m);
                rate *= in_factor(n, modes[m].statistics);
                overflow |= n == modes[m].n_max && modes[m].statistics == Statistics::Boson;
            }
            if rate > 0.0 {
                if overflow {
                    dropped_rate[s] += rate;
                    dropped_transitions += 1;
                } else {
                    pairs.push((s, (s as isize + shift) as usize, rate));
                }
            }
            // Reverse events are added as pairs from their own source state;
            // here only those leaving the basis are recorded.
            let mut rate = proc.rate;
            let mut overflow = false;
            for &m in prod {
                rate *= out_factor(basis.occupation(s, m));
            }
            for &m in cons {
                let n = basis.occupation(s, m);
                rate *= in_factor(n, modes[m].statistics);
                overflow |= n == modes[m].n_max && modes[m].statistics == Statistics::Boson;
            }
            if rate > 0.0 && overflow {
                dropped_rate[s] += rate;
                dropped_transitions += 1;
            }
        }
    }
    let q = RateMatrix::from_pairs(basis.dim(), pairs)?;
    Ok(KineticRates { q, truncation: TruncationFlux { dropped_transitions, dropped_rate } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::ModeSpec;

    fn fb_basis(n_max: usize) -> FockBasis {
        FockBasis::new(vec![ModeSpec::fermion(0.0), ModeSpec::fermion(0.5), ModeSpec::boson(0.5, n_max)]).unwrap()
    }

    const FB: ProcessKind = ProcessKind::FermionBoson { lower: 0, upper: 1, boson: 2 };

    #[test]
    fn fermion_boson_rates_are_n_q() {
        let b = fb_basis(4);
        let q = 0.3;
        let k = build_kinetic_q(&b, &[ProcessSpec::new(FB, q)]).unwrap();
        let d = k.q.to_dense();
        for n in 1..=4 {
            let from = b.index_of(&[0, 1, n - 1]).unwrap();
            let to = b.index_of(&[1, 0, n]).unwrap();
            assert!((d[(to, from)] - n as f64 * q).abs() < 1e-15);
            assert!((d[(from, to)] - n as f64 * q).abs() < 1e-15);
        }
        // <0,1,4> would emit into n = 5.
        assert_eq!(k.truncation.dropped_transitions, 1);
        let s = b.index_of(&[0, 1, 4]).unwrap();
        assert!((k.truncation.dropped_rate[s] - 5.0 * q).abs() < 1e-15);
    }

    #[test]
    fn pauli_blocking() {
        let b = fb_basis(3);
        let k = build_kinetic_q(&b, &[ProcessSpec::new(FB, 1.0)]).unwrap();
        let d = k.q.to_dense();
        let s = b.index_of(&[1, 1, 1]).unwrap();
        assert_eq!(d[(s, s)], 0.0);
    }

    #[test]
    fn merge_rate() {
        let b = FockBasis::new(vec![ModeSpec::boson(0.4, 5), ModeSpec::boson(0.6, 5), ModeSpec::boson(1.0, 5)]).unwrap();
        let q = 0.7;
        let k = build_kinetic_q(&b, &[ProcessSpec::new(ProcessKind::Merge { a: 0, b: 1, c: 2 }, q)]).unwrap();
        let d = k.q.to_dense();
        let from = b.index_of(&[3, 2, 1]).unwrap();
        let to = b.index_of(&[2, 1, 2]).unwrap();
        assert!((d[(to, from)] - q * 3.0 * 2.0 * 2.0).abs() < 1e-14);
    }

    #[test]
    fn statistics_and_energy_are_checked() {
        let b = fb_basis(2);
        let bad = ProcessSpec::new(ProcessKind::Merge { a: 0, b: 1, c: 2 }, 1.0);
        assert!(matches!(build_kinetic_q(&b, &[bad]), Err(Error::InvalidProcess(_))));
        let b = FockBasis::new(vec![ModeSpec::fermion(0.0), ModeSpec::fermion(0.5), ModeSpec::boson(0.6, 2)]).unwrap();
        assert!(build_kinetic_q(&b, &[ProcessSpec::new(FB, 1.0)]).is_err());
        assert!(build_kinetic_q(&b, &[ProcessSpec::new(ProcessKind::FermionBoson { lower: 0, upper: 0, boson: 2 }, 1.0)])
            .is_err());
    }
}
