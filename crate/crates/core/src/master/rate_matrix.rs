use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Generator of a symmetric continuous-time Markov chain in the column
/// convention (`dP/dt = Q P`).
///
/// Stored sparsely as the upper-triangle list of transition rates; the
/// diagonal is always minus the column sum, so zero column sums and symmetry
/// hold by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMatrix {
    dim: usize,
    pairs: Vec<(usize, usize, f64)>,
    diag: Vec<f64>,
    dt: Option<f64>,
}

impl RateMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, pairs: Vec::new(), diag: vec![0.0; dim], dt: None }
    }

    /// Builds a generator from symmetric transition rates between distinct
    /// states. Rates given for the same unordered pair are summed; zero rates
    /// are dropped.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, r) in pairs {
            if i >= dim || j >= dim {
                return Err(Error::InvalidRateMatrix(format!("pair ({i}, {j}) out of range for dimension {dim}")));
            }
            if i == j {
                return Err(Error::InvalidRateMatrix(format!("self-transition on state {i}")));
            }
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::InvalidRateMatrix(format!("rate {r} between {i} and {j}")));
            }
            *merged.entry((i.min(j), i.max(j))).or_insert(0.0) += r;
        }
        let pairs: Vec<_> = merged.into_iter().filter(|&(_, r)| r > 0.0).map(|((i, j), r)| (i, j, r)).collect();
        let mut diag = vec![0.0; dim];
        for &(i, j, r) in &pairs {
            diag[i] -= r;
            diag[j] -= r;
        }
        Ok(Self { dim, pairs, diag, dt: None })
    }

    /// Validates a dense generator: nonnegative symmetric off-diagonal part and
    /// zero column sums, each within `1e-12` relative to the largest rate.
    pub fn from_dense(q: &DMatrix<f64>) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::InvalidRateMatrix(format!("shape {}x{}", q.nrows(), q.ncols())));
        }
        let n = q.nrows();
        let scale = q.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;
        let mut pairs = Vec::new();
        for j in 0..n {
            for i in 0..n {
                if i == j {
                    continue;
                }
                let x = q[(i, j)];
                if !(x >= -tol) {
                    return Err(Error::InvalidRateMatrix(format!("negative rate Q[{i},{j}] = {x}")));
                }
                if (x - q[(j, i)]).abs() > tol {
                    return Err(Error::InvalidRateMatrix(format!("Q[{i},{j}] != Q[{j},{i}]")));
                }
                if i < j {
                    pairs.push((i, j, 0.5 * (x + q[(j, i)]).max(0.0)));
                }
            }
            let sum: f64 = q.column(j).sum();
            if sum.abs() > tol * n as f64 {
                return Err(Error::InvalidRateMatrix(format!("column {j} sums to {sum:e}")));
            }
        }
        Self::from_pairs(n, pairs)
    }

    /// Records the coarse-graining step the rates were built with.
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> Option<f64> {
        self.dt
    }

    /// Upper-triangle transition rates `(i, j, rate)` with `i < j`.
    pub fn pairs(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn is_zero(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `max |Q[a, a]|`.
    pub fn max_exit_rate(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut q = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, r) in &self.pairs {
            q[(i, j)] = r;
            q[(j, i)] = r;
        }
        for (i, &d) in self.diag.iter().enumerate() {
            q[(i, i)] = d;
        }
        q
    }

    /// `out = Q x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        for ((o, &d), &xi) in out.iter_mut().zip(&self.diag).zip(x) {
            *o = d * xi;
        }
        for &(i, j, r) in &self.pairs {
            out[i] += r * x[j];
            out[j] += r * x[i];
        }
    }

    /// Generator restricted to `states` (in the given order), keeping only the
    /// transitions between them.
    pub fn restrict(&self, states: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.dim];
        for (k, &s) in states.iter().enumerate() {
            local[s] = k;
        }
        let pairs = self.pairs.iter().filter_map(|&(i, j, r)| {
            let (a, b) = (local[i], local[j]);
            (a != usize::MAX && b != usize::MAX).then_some((a, b, r))
        });
        let mut q = Self::from_pairs(states.len(), pairs).expect("restriction of a valid generator");
        q.dt = self.dt;
        q
    }

    /// Connected components of the transition graph: `(count, label per state)`,
    /// labels numbered in order of each component's lowest state.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut parent: Vec<usize> = (0..self.dim).collect();
        fn find(p: &mut [usize], mut a: usize) -> usize {
            while p[a] != a {
                p[a] = p[p[a]];
                a = p[a];
            }
            a
        }
        for &(i, j, _) in &self.pairs {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut label = vec![usize::MAX; self.dim];
        let mut root_label = vec![usize::MAX; self.dim];
        let mut count = 0;
        for s in 0..self.dim {
            let r = find(&mut parent, s);
            if root_label[r] == usize::MAX {
                root_label[r] = count;
                count += 1;
            }
            label[s] = root_label[r];
        }
        (count, label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_and_invariants() {
        let q = RateMatrix::from_pairs(3, [(0, 1, 0.5), (2, 1, 0.25), (1, 0, 0.5)]).unwrap();
        let d = q.to_dense();
        assert_eq!(d[(0, 1)], 1.0);
        assert_eq!(d[(1, 2)], 0.25);
        for j in 0..3 {
            assert!(d.column(j).sum().abs() < 1e-15);
        }
        assert_eq!(RateMatrix::from_dense(&d).unwrap(), q);
    }

    #[test]
    fn rejects_bad_dense_generators() {
        let asym = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 1.0, -2.0]);
        assert!(RateMatrix::from_dense(&asym).is_err());
        let bad_sum = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -0.5]);
        assert!(RateMatrix::from_dense(&bad_sum).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!(RateMatrix::from_dense(&neg).is_err());
    }

    #[test]
    fn apply_matches_dense_product() {
        let q = RateMatrix::from_pairs(4, [(0, 1, 0.3), (1, 3, 1.1), (0, 2, 0.7)]).unwrap();
        let x = [0.1, 0.2, 0.3, 0.4];
        let mut y = [0.0; 4];
        q.apply(&x, &mut y);
        let expect = q.to_dense() * nalgebra::DVector::from_column_slice(&x);
        for i in 0..4 {
            assert!((y[i] - expect[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn components_and_restriction() {
        let q = RateMatrix::from_pairs(5, [(0, 2, 1.0), (3, 4, 2.0)]).unwrap();
        let (n, labels) = q.components();
        assert_eq!(n, 3);
        assert_eq!(labels, vec![0, 1, 0, 2, 2]);
        let sub = q.restrict(&[3, 4]);
        assert_eq!(sub.pairs(), &[(0, 1, 2.0)]);
    }
}
