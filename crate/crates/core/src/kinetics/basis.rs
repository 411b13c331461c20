use serde::{Deserialize, Serialize};

use crate::spectral::ProbabilityVector;
use crate::{Error, Result};

/// Tolerance on the normalisation of a single-mode marginal.
const MARGINAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Fermion,
    Boson,
}

/// One single-particle state: its statistics, energy and occupation cap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub statistics: Statistics,
    pub energy: f64,
    pub n_max: usize,
}

impl ModeSpec {
    pub fn fermion(energy: f64) -> Self {
        Self { statistics: Statistics::Fermion, energy, n_max: 1 }
    }

    pub fn boson(energy: f64, n_max: usize) -> Self {
        Self { statistics: Statistics::Boson, energy, n_max }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.energy.is_finite() {
            return Err(Error::InvalidArgument(format!("mode energy {} is not finite", self.energy)));
        }
        match self.statistics {
            Statistics::Fermion if self.n_max != 1 => {
                Err(Error::InvalidArgument(format!("fermion mode with n_max = {}", self.n_max)))
            }
            Statistics::Boson if self.n_max == 0 => Err(Error::InvalidArgument("boson mode with n_max = 0".into())),
            _ => Ok(()),
        }
    }

    pub fn is_fermion(&self) -> bool {
        self.statistics == Statistics::Fermion
    }
}

/// All occupation tuples `<n_1, ..., n_m>` with `n_i <= n_max_i`, numbered
/// lexicographically with the first mode most significant.
///
/// This ordering is part of the output format: state columns in exported
/// tables follow it.
#[derive(Clone, Debug, PartialEq)]
pub struct FockBasis {
    modes: Vec<ModeSpec>,
    strides: Vec<usize>,
    dim: usize,
}

impl FockBasis {
    pub fn new(modes: Vec<ModeSpec>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidArgument("a Fock basis needs at least one mode".into()));
        }
        for m in &modes {
            m.validate()?;
        }
        let mut strides = vec![0; modes.len()];
        let mut dim: usize = 1;
        for (i, m) in modes.iter().enumerate().rev() {
            strides[i] = dim;
            dim = dim
                .checked_mul(m.n_max + 1)
                .ok_or_else(|| Error::InvalidArgument("Fock basis dimension overflows".into()))?;
        }
        Ok(Self { modes, strides, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Occupation of `mode` in basis state `index`.
    #[inline]
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % (self.modes[mode].n_max + 1)
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.modes.len()).map(|m| self.occupation(index, m)).collect()
    }

    /// Index of an occupation tuple, or `None` if it has the wrong length or
    /// exceeds a cap.
    pub fn index_of(&self, occupations: &[usize]) -> Option<usize> {
        if occupations.len() != self.modes.len() {
            return None;
        }
        let mut idx = 0;
        for ((&n, m), &s) in occupations.iter().zip(&self.modes).zip(&self.strides) {
            if n > m.n_max {
                return None;
            }
            idx += n * s;
        }
        Some(idx)
    }

    pub(crate) fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    pub fn total_energy(&self, index: usize) -> f64 {
        self.modes.iter().enumerate().map(|(m, spec)| self.occupation(index, m) as f64 * spec.energy).sum()
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes.len() {
            return Err(Error::InvalidArgument(format!("mode {mode} out of range for {} modes", self.modes.len())));
        }
        Ok(())
    }
}

/// Mean occupation per mode: `f` for fermions, `N` for bosons.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanOccupations {
    pub values: Vec<f64>,
    pub statistics: Vec<Statistics>,
}

impl MeanOccupations {
    pub fn sup_distance(&self, other: &MeanOccupations) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `sum_states n_mode(state) P(state)`.
pub fn mean_occupation(p: &ProbabilityVector, basis: &FockBasis, mode: usize) -> Result<f64> {
    basis.check_mode(mode)?;
    if p.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: p.dim() });
    }
    Ok(p.iter().enumerate().map(|(s, &w)| basis.occupation(s, mode) as f64 * w).sum())
}

pub fn mean_occupations(p: &ProbabilityVector, basis: &FockBasis) -> Result<MeanOccupations> {
    let values = (0..basis.mode_count()).map(|m| mean_occupation(p, basis, m)).collect::<Result<_>>()?;
    Ok(MeanOccupations { values, statistics: basis.modes().iter().map(|m| m.statistics).collect() })
}

/// Marginal distribution of one mode's occupation under `p`.
pub fn marginal(p: &[f64], basis: &FockBasis, mode: usize) -> Vec<f64> {
    let mut out = vec![0.0; basis.modes()[mode].n_max + 1];
    for (s, &w) in p.iter().enumerate() {
        out[basis.occupation(s, mode)] += w;
    }
    out
}

/// Independent occupations: `P(<n_1...n_m>) = prod_i marginal_i(n_i)`.
pub fn product_state(basis: &FockBasis, marginals: &[Vec<f64>]) -> Result<ProbabilityVector> {
    if marginals.len() != basis.mode_count() {
        return Err(Error::DimensionMismatch { expected: basis.mode_count(), got: marginals.len() });
    }
    for (i, (m, spec)) in marginals.iter().zip(basis.modes()).enumerate() {
        if m.len() != spec.n_max + 1 {
            return Err(Error::InvalidArgument(format!(
                "marginal {i} has {} entries, mode allows occupations 0..={}",
                m.len(),
                spec.n_max
            )));
        }
        if m.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidProbability(format!("marginal {i} has a negative or non-finite entry")));
        }
        let total: f64 = m.iter().sum();
        if (total - 1.0).abs() > MARGINAL_TOL {
            return Err(Error::InvalidProbability(format!("marginal {i} sums to {total}")));
        }
    }
    let p = (0..basis.dim())
        .map(|s| marginals.iter().enumerate().map(|(i, m)| m[basis.occupation(s, i)]).product())
        .collect();
    ProbabilityVector::new(p)
}

/// Fermion marginal `(1 - f, f)`.
pub fn bernoulli_marginal(f: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidArgument(format!("occupation {f} outside [0, 1]")));
    }
    Ok(vec![1.0 - f, f])
}

/// Truncated geometric marginal `p_n = x^n (1 - x) / (1 - x^(n_max + 1))`.
pub fn geometric_marginal(ratio: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::InvalidArgument(format!("geometric ratio {ratio} outside [0, 1)")));
    }
    let mut p: Vec<f64> = (0..=n_max).scan(1.0, |w, _| {
        let cur = *w;
        *w *= ratio;
        Some(cur)
    })
    .collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

/// Geometric marginal whose untruncated mean is `mean`, i.e. ratio
/// `mean / (mean + 1)`.
pub fn geometric_marginal_with_mean(mean: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::InvalidArgument(format!("mean occupation {mean} must be nonnegative")));
    }
    geometric_marginal(mean / (mean + 1.0), n_max)
}

/// Truncated Bose-Einstein marginal at mode energy `energy` and temperature
/// `temperature`.
pub fn thermal_marginal(energy: f64, temperature: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(energy > 0.0 && temperature > 0.0) {
        return Err(Error::InvalidArgument(format!("thermal marginal needs energy {energy} > 0 and T {temperature} > 0")));
    }
    geometric_marginal((-energy / temperature).exp(), n_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_fermions_one_boson(n_max: usize) -> FockBasis {
        FockBasis::new(vec![ModeSpec::fermion(0.0), ModeSpec::fermion(1.0), ModeSpec::boson(1.0, n_max)]).unwrap()
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let b = two_fermions_one_boson(2);
        assert_eq!(b.dim(), 12);
        assert_eq!(b.occupations(0), vec![0, 0, 0]);
        assert_eq!(b.occupations(1), vec![0, 0, 1]);
        assert_eq!(b.occupations(3), vec![0, 1, 0]);
        assert_eq!(b.occupations(11), vec![1, 1, 2]);
        for s in 0..b.dim() {
            assert_eq!(b.index_of(&b.occupations(s)), Some(s));
        }
        assert_eq!(b.index_of(&[0, 0, 3]), None);
    }

    #[test]
    fn invalid_modes() {
        assert!(FockBasis::new(vec![]).is_err());
        assert!(FockBasis::new(vec![ModeSpec { statistics: Statistics::Fermion, energy: 0.0, n_max: 2 }]).is_err());
        assert!(FockBasis::new(vec![ModeSpec::boson(1.0, 0)]).is_err());
    }

    #[test]
    fn delta_and_uniform_means() {
        let b = FockBasis::new(vec![ModeSpec::fermion(0.0), ModeSpec::fermion(1.0)]).unwrap();
        let s = b.index_of(&[1, 0]).unwrap();
        let p = ProbabilityVector::delta(4, s).unwrap();
        assert_eq!(mean_occupation(&p, &b, 0).unwrap(), 1.0);
        let mut u = vec![0.0; 4];
        u[b.index_of(&[1, 0]).unwrap()] = 0.5;
        u[b.index_of(&[0, 1]).unwrap()] = 0.5;
        let p = ProbabilityVector::new(u).unwrap();
        assert_eq!(mean_occupation(&p, &b, 0).unwrap(), 0.5);
        assert!(mean_occupation(&p, &b, 2).is_err());
    }

    #[test]
    fn vacuum_product_state() {
        let b = two_fermions_one_boson(3);
        let m = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0, 0.0, 0.0]];
        let p = product_state(&b, &m).unwrap();
        assert_eq!(p[0], 1.0);
    }

    #[test]
    fn two_fermion_product() {
        let b = FockBasis::new(vec![ModeSpec::fermion(0.0), ModeSpec::fermion(1.0)]).unwrap();
        let f = 0.3;
        let m = bernoulli_marginal(f).unwrap();
        let p = product_state(&b, &[m.clone(), m]).unwrap();
        assert!((p[b.index_of(&[1, 1]).unwrap()] - f * f).abs() < 1e-16);
    }

    #[test]
    fn marginal_length_is_checked() {
        let b = two_fermions_one_boson(3);
        let m = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]];
        assert!(product_state(&b, &m).is_err());
    }
}
