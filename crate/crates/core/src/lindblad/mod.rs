//! Markovian route at `φ = ±π/2`: Fock-truncated master equation, steady
//! states, Liouvillian spectrum, regression correlators and input-output
//! statistics.

mod correlation;
mod fock;
mod liouvillian;
mod propagate;
mod semiclassical;
mod spectrum;
mod steady;

pub use correlation::{
    reflected_density, transmitted_g2_output, two_time_correlation, Correlator, MARKOV_COS_LIMIT,
};
pub use fock::FockOperator;
pub use liouvillian::{
    build_hamiltonian, build_hamiltonian_with_cutoff, build_liouvillian,
    build_liouvillian_with_cutoff, coordinates, from_coordinates, LiouvillianMatrix,
};
pub use propagate::{propagate_ode, SpectralPropagator, ODE_HORIZON};
pub use semiclassical::{default_cutoff, semiclassical_branches};
pub use spectrum::{liouvillian_spectrum, SpectrumResult, ZERO_EIGENVALUE};
pub use steady::{
    cavity_observables, steady_state, steady_state_ode, trace_distance, CavityObservables,
    SteadyState, TOP_LEVEL_LIMIT,
};
