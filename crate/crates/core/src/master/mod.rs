//! Master-equation dynamics built from interaction matrix elements, with
//! unitary reference dynamics and the phase-scrambling protocol connecting
//! the two.

mod evolve;
mod rate_matrix;
mod scramble;
mod stationary;
mod system;
mod unitary;

pub use evolve::{dt_sweep, evolve_master, evolve_master_trajectory, DtSweepPoint, Method};
pub use rate_matrix::RateMatrix;
pub use scramble::{phase_scramble_evolution, ScrambleSettings, ScrambleTrajectory};
pub use stationary::{stationary_analysis, StationaryReport};
pub use system::{build_q_matrix, fermi_rate, DensityOfStates, SystemSpec, Window};
pub use unitary::{
    evolve_smoothed, evolve_unitary_between, evolve_unitary_reference, one_step_propagator, Propagator,
};
