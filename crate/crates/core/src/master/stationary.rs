use nalgebra::SymmetricEigen;

use super::RateMatrix;
use crate::spectral::ProbabilityVector;

/// Stationary state and relaxation rate of a symmetric generator.
#[derive(Clone, Debug)]
pub struct StationaryReport {
    /// Uniform distribution when the chain is ergodic.
    pub stationary: Option<ProbabilityVector>,
    /// Smallest nonzero eigenvalue of `-Q`; `None` for a single state or a
    /// disconnected chain.
    pub spectral_gap: Option<f64>,
    pub ergodic: bool,
    pub components: usize,
    pub component_labels: Vec<usize>,
}

/// A symmetric generator has zero row sums as well as zero column sums, so
/// the uniform vector is stationary; it is the unique one exactly when the
/// transition graph is connected.
pub fn stationary_analysis(q: &RateMatrix) -> StationaryReport {
    let (components, component_labels) = q.components();
    let ergodic = components == 1;
    let stationary = ergodic.then(|| ProbabilityVector::uniform(q.dim()).expect("nonempty"));
    let spectral_gap = if ergodic && q.dim() > 1 {
        let mut ev: Vec<f64> = SymmetricEigen::new(-q.to_dense()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Some(ev[1])
    } else {
        None
    };
    StationaryReport { stationary, spectral_gap, ergodic, components, component_labels }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_gap() {
        let r = 0.35;
        let rep = stationary_analysis(&RateMatrix::from_pairs(2, [(0, 1, r)]).unwrap());
        assert!(rep.ergodic);
        assert!((rep.spectral_gap.unwrap() - 2.0 * r).abs() < 1e-14);
        assert_eq!(rep.stationary.unwrap().as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn block_diagonal_is_not_ergodic() {
        let q = RateMatrix::from_pairs(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let rep = stationary_analysis(&q);
        assert!(!rep.ergodic);
        assert_eq!(rep.components, 2);
        assert!(rep.stationary.is_none() && rep.spectral_gap.is_none());
    }
}
