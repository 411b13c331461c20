//! Occupation-number state spaces and the kinetics of their mean occupations.

mod basis;
mod collision;
mod consistency;
mod diagram;
mod process;

pub use basis::{
    bernoulli_marginal, geometric_marginal, geometric_marginal_with_mean, marginal, mean_occupation,
    mean_occupations, product_state, thermal_marginal, FockBasis, MeanOccupations, ModeSpec, Statistics,
};
pub use collision::{
    boltzmann_fixed_point, boltzmann_rhs_fermion_boson, boltzmann_rhs_three_phonon, bose_einstein, collision_rhs,
    evolve_boltzmann, fermi_dirac, net_fluxes, FixedPoint, ThreePhononChannel,
};
pub use consistency::{verify_derivative_consistency, ConsistencyReport, ModeConsistency};
pub use diagram::{diagram_commutativity, CommutativityReport, ComponentCommutativity, ShellSelector};
pub use process::{build_kinetic_q, KineticRates, ProcessKind, ProcessSpec, TruncationFlux, ENERGY_TOL};
