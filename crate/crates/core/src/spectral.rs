//! Amplitudes, probabilities, unitary and bistochastic matrices.
//!
//! Averaging the squared modulus of `U A` over independent uniform phases of
//! the input amplitudes leaves only the diagonal terms, so the probabilities
//! transform with `T = |U|^2` taken elementwise. [`hadamard_square`] is the
//! closed form, [`phase_average_mc`] the sampled one.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::stats::{reduce_samples, sample_rng};
use crate::{Error, Result, C64};

/// Tolerance for validating user-supplied unitaries, distributions and
/// bistochastic matrices.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Replaces `-0.0` and subnormals by `+0.0`.
#[inline]
pub(crate) fn flush(x: f64) -> f64 {
    if x == 0.0 || x.is_subnormal() {
        0.0
    } else {
        x
    }
}

/// Complex amplitudes with unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeVector(DVector<C64>);

impl AmplitudeVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        Self::with_tolerance(DVector::from_vec(entries), VALIDATION_TOL)
    }

    pub(crate) fn with_tolerance(v: DVector<C64>, tol: f64) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidArgument("amplitude vector is empty".into()));
        }
        if v.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidArgument("amplitude vector has non-finite entries".into()));
        }
        let dev = (v.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs();
        if dev > tol {
            return Err(Error::NotNormalized(dev));
        }
        Ok(Self(v))
    }

    /// Basis state `k` of an `n`-dimensional space.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidArgument(format!("basis index {k} out of range for dimension {n}")));
        }
        let mut v = DVector::zeros(n);
        v[k] = C64::new(1.0, 0.0);
        Ok(Self(v))
    }

    /// Amplitudes `sqrt(P_a) e^{i phi_a}`.
    pub fn from_probabilities(p: &ProbabilityVector, phases: &[f64]) -> Result<Self> {
        if phases.len() != p.dim() {
            return Err(Error::DimensionMismatch { expected: p.dim(), got: phases.len() });
        }
        let v = p.iter().zip(phases).map(|(&pa, &phi)| C64::from_polar(pa.sqrt(), phi));
        Self::new(v.collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> ProbabilityVector {
        ProbabilityVector::new(self.0.iter().map(|a| a.norm_sqr()).collect())
            .expect("unit-norm amplitudes give a distribution")
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|a| a.conj()))
    }
}

/// Probabilities: nonnegative, summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(entries, VALIDATION_TOL)
    }

    pub(crate) fn with_tolerance(mut entries: Vec<f64>, tol: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        for (i, p) in entries.iter_mut().enumerate() {
            *p = flush(*p);
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::InvalidProbability(format!("entry {i} = {p}")));
            }
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidProbability(format!("entries sum to {sum}")));
        }
        Ok(Self(entries))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn delta(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidProbability(format!("index {k} out of range for dimension {n}")));
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `-sum P ln P` with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.0)
    }

    pub fn sup_distance(&self, other: &ProbabilityVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Shannon entropy in nats.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// A square complex matrix with `U^H U = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(DMatrix<C64>);

impl UnitaryMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(m, VALIDATION_TOL)
    }

    pub fn with_tolerance(m: DMatrix<C64>, tol: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidArgument(format!("unitary must be square and nonempty, got {}x{}", m.nrows(), m.ncols())));
        }
        let (row, col, deviation) = unitarity_deviation(&m);
        if !(deviation <= tol) {
            return Err(Error::NotUnitary { row, col, deviation });
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Real rotation by `angle` in the plane of states 0 and 1.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(DMatrix::from_row_slice(2, 2, &[c, -s, s, c].map(|x| C64::new(x, 0.0))))
    }

    /// `exp(i H t)` for Hermitian `H`, via its eigendecomposition.
    pub fn from_hermitian(h: &DMatrix<C64>, t: f64) -> Result<Self> {
        let dev = hermiticity_deviation(h);
        if !h.is_square() || dev > VALIDATION_TOL {
            return Err(Error::InvalidArgument(format!("generator is not Hermitian (deviation {dev:e})")));
        }
        Ok(Self(hermitian_exp_i(h, t)))
    }

    /// `exp(i H t)` with `H` drawn from [`random_hermitian`].
    pub fn random<R: Rng + ?Sized>(n: usize, t: f64, rng: &mut R) -> Self {
        Self(hermitian_exp_i(&random_hermitian(n, rng), t))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn apply(&self, a: &AmplitudeVector) -> Result<AmplitudeVector> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: a.dim() });
        }
        Ok(AmplitudeVector(&self.0 * &a.0))
    }
}

/// Largest entry of `|U^H U - I|` with its position.
pub fn unitarity_deviation(m: &DMatrix<C64>) -> (usize, usize, f64) {
    let g = m.adjoint() * m;
    let mut worst = (0, 0, 0.0);
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = (g[(i, j)] - C64::new(target, 0.0)).norm();
            if d > worst.2 || d.is_nan() {
                worst = (i, j, d);
            }
        }
    }
    worst
}

pub(crate) fn hermiticity_deviation(h: &DMatrix<C64>) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    let mut dev: f64 = 0.0;
    for i in 0..h.nrows() {
        for j in 0..=i {
            dev = dev.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Hermitian matrix with standard-normal real diagonal and off-diagonal
/// entries whose real and imaginary parts are independent standard normals.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(rng.sample(StandardNormal), 0.0);
        for j in 0..i {
            let z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// `exp(i H t)` for Hermitian `H`.
pub(crate) fn hermitian_exp_i(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut w = v.clone();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = C64::from_polar(1.0, lambda * t);
        for x in w.column_mut(k).iter_mut() {
            *x *= phase;
        }
    }
    // W V^H from real products, which go through a blocked GEMM kernel.
    let (a, b) = (v.map(|z| z.re), v.map(|z| z.im));
    let (c, d) = (w.map(|z| z.re), w.map(|z| z.im));
    let re = &c * a.transpose() + &d * b.transpose();
    let im = &d * a.transpose() - &c * b.transpose();
    re.zip_map(&im, C64::new)
}

/// A real square matrix with entries in `[0, 1]` and unit row and column sums.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix(DMatrix<f64>);

impl TransitionMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, VALIDATION_TOL)
    }

    pub fn with_tolerance(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::NotBistochastic(format!("shape {}x{}", m.nrows(), m.ncols())));
        }
        if let Some((k, x)) = m.iter().enumerate().find(|(_, x)| !(**x >= -tol && **x <= 1.0 + tol)) {
            return Err(Error::NotBistochastic(format!("entry ({}, {}) = {x}", k % m.nrows(), k / m.nrows())));
        }
        let (row_dev, col_dev) = stochastic_deviation(&m);
        if row_dev > tol || col_dev > tol {
            return Err(Error::NotBistochastic(format!(
                "row sums deviate by {row_dev:e}, column sums by {col_dev:e}"
            )));
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Maximum deviation of the row sums and of the column sums from one.
    pub fn sum_deviation(&self) -> (f64, f64) {
        stochastic_deviation(&self.0)
    }

    pub fn is_permutation(&self) -> bool {
        let tol = VALIDATION_TOL;
        self.0.iter().all(|&x| x.abs() <= tol || (x - 1.0).abs() <= tol)
    }
}

fn stochastic_deviation(m: &DMatrix<f64>) -> (f64, f64) {
    let row = m.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
    let col = m.column_iter().map(|c| (c.sum() - 1.0).abs()).fold(0.0, f64::max);
    (row, col)
}

/// `T[a, b] = |U[a, b]|^2`.
pub fn hadamard_square(u: &UnitaryMatrix) -> TransitionMatrix {
    TransitionMatrix(u.0.map(|z| z.norm_sqr()))
}

/// Validates `m` as a unitary and returns its elementwise squared modulus.
pub fn hadamard_square_checked(m: &DMatrix<C64>) -> Result<TransitionMatrix> {
    UnitaryMatrix::new(m.clone()).map(|u| hadamard_square(&u))
}

/// One non-coherent step, `P' = T P`.
pub fn apply_noncoherent(t: &TransitionMatrix, p: &ProbabilityVector) -> Result<ProbabilityVector> {
    if t.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), got: p.dim() });
    }
    let out = &t.0 * DVector::from_column_slice(&p.0);
    ProbabilityVector::new(out.iter().copied().collect())
}

/// Sample mean of `|U A|^2` and its per-entry standard error.
#[derive(Clone, Debug)]
pub struct PhaseAverage {
    pub estimate: ProbabilityVector,
    pub standard_error: Vec<f64>,
    pub samples: usize,
}

/// Averages `|U A|^2` over `samples` draws of `A_b = sqrt(P_b) e^{i phi_b}`,
/// with the phases i.i.d. uniform on `[0, 2 pi)`. Entries with zero magnitude
/// carry no phase and consume no random numbers.
pub fn phase_average_mc(
    u: &UnitaryMatrix,
    magnitudes: &ProbabilityVector,
    samples: usize,
    seed: u64,
) -> Result<PhaseAverage> {
    if samples == 0 {
        return Err(Error::InvalidArgument("phase averaging needs at least one sample".into()));
    }
    let n = u.dim();
    if magnitudes.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: magnitudes.dim() });
    }
    let amp: Vec<f64> = magnitudes.iter().map(|p| p.sqrt()).collect();
    let m = u.matrix();

    let moments = reduce_samples(samples, n, |i, acc| {
        let mut rng = sample_rng(seed, i);
        let a: Vec<C64> = amp
            .iter()
            .map(|&r| if r > 0.0 { C64::from_polar(r, rng.random::<f64>() * TAU) } else { C64::new(0.0, 0.0) })
            .collect();
        let mut out = vec![0.0; n];
        for (row, o) in out.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for (col, &ac) in a.iter().enumerate() {
                s += m[(row, col)] * ac;
            }
            *o = s.norm_sqr();
        }
        acc.push(&out);
    });

    Ok(PhaseAverage {
        estimate: ProbabilityVector::new(moments.mean().to_vec())?,
        standard_error: moments.standard_error(),
        samples,
    })
}
