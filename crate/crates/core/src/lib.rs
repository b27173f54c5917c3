//! Few-photon scattering and open-system dynamics of a Kerr cavity coupled
//! to a waveguide at two separated points.

pub mod error;
pub mod lindblad;
pub mod model;
pub mod scattering_one;
pub mod scattering_two;

pub use error::{Error, Result};
pub use model::{
    chiral_phase, effective_coupling, mode_phases, normalize_angle, Direction, DriveConfig,
    ModePhases, NumericalControls, SystemParams,
};
pub use scattering_one::{green, scatter_single, self_energy, ScatterAmplitudes};
pub use scattering_two::{
    c_mnl, f_mn, g2_transmitted, g2_transmitted_eval, green_convolution, green_convolution_quadrature, t_matrix,
    two_photon_s, wavefunction_fft, wavefunction_t, Backend, Evaluation, Method, PositionGrid,
    SeriesDiagnostics, TwoPhotonAmplitude,
};
pub use lindblad::{
    build_hamiltonian, build_liouvillian, cavity_observables, liouvillian_spectrum,
    reflected_density, semiclassical_branches, steady_state, steady_state_ode,
    trace_distance, transmitted_g2_output, two_time_correlation, CavityObservables, Correlator, FockOperator,
    LiouvillianMatrix, SpectrumResult, SteadyState,
};
