use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::RateMatrix;
use crate::spectral::{hermiticity_deviation, VALIDATION_TOL};
use crate::{Error, Result, C64};

/// Coarse-graining window, given either as the energy-shell half-width `W` or
/// as the time step `dt`; the two are tied by `W dt = pi hbar`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    HalfWidth(f64),
    Dt(f64),
}

/// Unperturbed energies, interaction matrix and coarse-graining window of a
/// closed system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    energies: Vec<f64>,
    interaction: DMatrix<C64>,
    hbar: f64,
    window: Window,
}

impl SystemSpec {
    /// Validates and builds a system. `interaction` must be Hermitian and
    /// have an exactly zero diagonal: self-interaction belongs in `energies`.
    pub fn new(energies: Vec<f64>, interaction: DMatrix<C64>, hbar: f64, window: Window) -> Result<Self> {
        let n = energies.len();
        if n == 0 {
            return Err(Error::InvalidSystem("no states".into()));
        }
        if interaction.nrows() != n || interaction.ncols() != n {
            return Err(Error::InvalidSystem(format!(
                "interaction is {}x{} for {n} energies",
                interaction.nrows(),
                interaction.ncols()
            )));
        }
        if let Some(e) = energies.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidSystem(format!("non-finite energy {e}")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidSystem(format!("hbar must be positive, got {hbar}")));
        }
        let w = match window {
            Window::HalfWidth(w) => w,
            Window::Dt(dt) => dt,
        };
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidSystem(format!("window must be positive, got {window:?}")));
        }
        if let Some(i) = (0..n).find(|&i| interaction[(i, i)] != C64::new(0.0, 0.0)) {
            return Err(Error::InvalidSystem(format!(
                "interaction diagonal must be zero (absorb V[{i},{i}] into the energy)"
            )));
        }
        let dev = hermiticity_deviation(&interaction);
        if !(dev <= VALIDATION_TOL) {
            return Err(Error::InvalidSystem(format!("interaction is not Hermitian (deviation {dev:e})")));
        }
        Ok(Self { energies, interaction, hbar, window })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn interaction(&self) -> &DMatrix<C64> {
        &self.interaction
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Coarse-graining time step `dt = pi hbar / W`.
    pub fn dt(&self) -> f64 {
        match self.window {
            Window::Dt(dt) => dt,
            Window::HalfWidth(w) => PI * self.hbar / w,
        }
    }

    /// Energy-shell half-width `W = pi hbar / dt`.
    pub fn half_width(&self) -> f64 {
        match self.window {
            Window::HalfWidth(w) => w,
            Window::Dt(dt) => PI * self.hbar / dt,
        }
    }

    /// Shell membership, boundary inclusive.
    pub fn in_shell(&self, a: usize, b: usize) -> bool {
        (self.energies[a] - self.energies[b]).abs() <= self.half_width()
    }

    pub fn with_window(&self, window: Window) -> Result<Self> {
        Self::new(self.energies.clone(), self.interaction.clone(), self.hbar, window)
    }

    /// Same system with every interaction element multiplied by `scale`.
    pub fn with_coupling_scale(&self, scale: f64) -> Result<Self> {
        Self::new(self.energies.clone(), self.interaction.map(|v| v * scale), self.hbar, self.window)
    }

    /// `H = diag(E) + V`.
    pub fn hamiltonian(&self) -> DMatrix<C64> {
        let mut h = self.interaction.clone();
        for (i, &e) in self.energies.iter().enumerate() {
            h[(i, i)] += C64::new(e, 0.0);
        }
        h
    }

    /// The interaction with every out-of-shell element removed.
    pub fn shell_interaction(&self) -> DMatrix<C64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| if self.in_shell(i, j) { self.interaction[(i, j)] } else { C64::new(0.0, 0.0) })
    }
}

/// Rate matrix of the non-coherent master equation:
/// `Q[a, b] = (2 / hbar^2) |V[a, b]|^2 dt` for distinct states within the
/// shell `|E_a - E_b| <= W`, zero outside, with the diagonal fixed by zero
/// column sums.
pub fn build_q_matrix(spec: &SystemSpec) -> RateMatrix {
    let n = spec.dim();
    let dt = spec.dt();
    let prefactor = 2.0 * dt / (spec.hbar * spec.hbar);
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let v_sq = spec.interaction[(a, b)].norm_sqr();
            if v_sq > 0.0 && spec.in_shell(a, b) {
                pairs.push((a, b, prefactor * v_sq));
            }
        }
    }
    RateMatrix::from_pairs(n, pairs).expect("rates are finite and nonnegative").with_dt(dt)
}

/// Fermi's golden rule, `(2 pi / hbar) |V|^2 nu`.
pub fn fermi_rate(v_sq: f64, nu: f64, hbar: f64) -> Result<f64> {
    if !(v_sq >= 0.0) || !(nu >= 0.0) {
        return Err(Error::InvalidArgument(format!("|V|^2 = {v_sq} and nu = {nu} must be nonnegative")));
    }
    if !(hbar > 0.0) {
        return Err(Error::InvalidArgument(format!("hbar must be positive, got {hbar}")));
    }
    Ok(2.0 * PI / hbar * v_sq * nu)
}

/// Density of states, in states per unit energy.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityOfStates {
    Constant(f64),
    /// Piecewise-linear through `(energy, density)` knots sorted by energy,
    /// held constant outside the knot range.
    Tabulated(Vec<(f64, f64)>),
}

impl DensityOfStates {
    pub fn constant(nu: f64) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("density of states must be nonnegative, got {nu}")));
        }
        Ok(Self::Constant(nu))
    }

    pub fn tabulated(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidArgument("empty density-of-states table".into()));
        }
        if knots.iter().any(|&(e, nu)| !e.is_finite() || !(nu >= 0.0 && nu.is_finite())) {
            return Err(Error::InvalidArgument("density of states must be finite and nonnegative".into()));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::Tabulated(knots))
    }

    pub fn eval(&self, energy: f64) -> f64 {
        match self {
            Self::Constant(nu) => *nu,
            Self::Tabulated(k) => {
                let i = k.partition_point(|&(e, _)| e <= energy);
                if i == 0 {
                    k[0].1
                } else if i == k.len() {
                    k[k.len() - 1].1
                } else {
                    let (e0, v0) = k[i - 1];
                    let (e1, v1) = k[i];
                    v0 + (v1 - v0) * (energy - e0) / (e1 - e0)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn zero_coupling_gives_zero_rates() {
        let spec = SystemSpec::new(vec![0.0, 0.0, 1.0], DMatrix::zeros(3, 3), 1.0, Window::Dt(1.0)).unwrap();
        let q = build_q_matrix(&spec);
        assert!(q.to_dense().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn degenerate_pair_rate() {
        let (v, dt, hbar) = (0.3, 0.7, 1.3);
        let vm = DMatrix::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, v), C64::new(0.0, -v), c(0.0)]);
        let q = build_q_matrix(&SystemSpec::new(vec![2.0, 2.0], vm, hbar, Window::Dt(dt)).unwrap()).to_dense();
        let r = 2.0 * v * v * dt / (hbar * hbar);
        assert!((q[(0, 1)] - r).abs() < 1e-15 && (q[(1, 0)] - r).abs() < 1e-15);
        assert!((q[(0, 0)] + r).abs() < 1e-15 && (q[(1, 1)] + r).abs() < 1e-15);
    }

    #[test]
    fn out_of_shell_pairs_are_excluded() {
        let vm = DMatrix::from_fn(3, 3, |i, j| if i == j { c(0.0) } else { c(0.1) });
        let spec = SystemSpec::new(vec![0.0, 0.0, 10.0], vm, 1.0, Window::HalfWidth(1.0)).unwrap();
        let q = build_q_matrix(&spec).to_dense();
        assert_eq!(q[(0, 2)], 0.0);
        assert_eq!(q[(2, 0)], 0.0);
        assert!(q[(0, 1)] > 0.0);
    }

    #[test]
    fn shell_boundary_is_inclusive() {
        let vm = DMatrix::from_fn(2, 2, |i, j| if i == j { c(0.0) } else { c(0.1) });
        let spec = SystemSpec::new(vec![0.0, 0.5], vm, 1.0, Window::HalfWidth(0.5)).unwrap();
        assert!(build_q_matrix(&spec).to_dense()[(0, 1)] > 0.0);
    }

    #[test]
    fn window_conversion() {
        let spec = SystemSpec::new(vec![0.0], DMatrix::zeros(1, 1), 2.0, Window::Dt(0.5)).unwrap();
        assert!((spec.half_width() - PI * 2.0 / 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_systems() {
        let mut v = DMatrix::zeros(2, 2);
        v[(0, 0)] = c(0.1);
        assert!(SystemSpec::new(vec![0.0, 1.0], v, 1.0, Window::Dt(1.0)).is_err());
        let mut v = DMatrix::zeros(2, 2);
        v[(0, 1)] = c(0.1);
        v[(1, 0)] = c(0.2);
        assert!(SystemSpec::new(vec![0.0, 1.0], v, 1.0, Window::Dt(1.0)).is_err());
        assert!(SystemSpec::new(vec![0.0, 1.0], DMatrix::zeros(2, 2), 1.0, Window::Dt(-1.0)).is_err());
        assert!(SystemSpec::new(vec![0.0, 1.0], DMatrix::zeros(2, 2), 0.0, Window::Dt(1.0)).is_err());
    }

    #[test]
    fn fermi_rule_values() {
        assert_eq!(fermi_rate(0.0, 3.0, 1.0).unwrap(), 0.0);
        assert!((fermi_rate(1.0, 1.0, 1.0).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!(fermi_rate(-1.0, 1.0, 1.0).is_err());
        assert!(fermi_rate(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn tabulated_density() {
        let nu = DensityOfStates::tabulated(vec![(1.0, 4.0), (0.0, 2.0)]).unwrap();
        assert_eq!(nu.eval(0.5), 3.0);
        assert_eq!(nu.eval(-1.0), 2.0);
        assert_eq!(nu.eval(5.0), 4.0);
        assert!(DensityOfStates::constant(-1.0).is_err());
    }
}
