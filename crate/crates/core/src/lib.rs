//! Phase-averaged ("non-coherent") evolution of closed, weakly interacting
//! quantum systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] holds amplitudes, probabilities, unitary and bistochastic
//!   matrices, the elementwise-modulus-squared map between them and a Monte
//!   Carlo phase-averaging oracle.
//! * [`master`] builds the rate matrix of the master equation from interaction
//!   matrix elements, evolves it three independent ways, analyses its
//!   stationary state and provides unitary reference dynamics together with
//!   the phase-scrambling protocol that connects the two pictures.
//! * [`kinetics`] works in occupation-number bases: many-body rate matrices
//!   for fermion-boson and three-boson processes, mean occupations, collision
//!   integrals and the checks tying them to the exact master equation.
//! * [`timescale`] contains the window function, its box approximation and
//!   the applicability estimates for the coarse-graining step.

// `!(x > 0.0)` is deliberate throughout: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// State indices address several arrays at once.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod kinetics;
pub mod master;
pub mod ode;
pub mod quadrature;
pub mod spectral;
pub mod stats;
pub mod timescale;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Library version string, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
