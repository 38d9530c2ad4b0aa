//! Frequency-domain optical response of multilevel quantum systems prepared
//! in nonequilibrium states.
//!
//! The crate computes heterodyne-detected linear and wave-mixing signals for
//! few-level systems whose initial density matrix may carry populations and
//! coherences, and for a three-level system driven to a nonequilibrium steady
//! state by a continuous field. Signals are built from frequency-domain
//! resolvent propagators in Liouville space; pulsed probes enter through the
//! spectrum of a linearly chirped Gaussian field, whose one-sided Fourier
//! transform makes the signals sensitive to the spectral phase.
//!
//! Units: energies and frequencies in eV, times in 1/eV (`hbar` = 1 inside
//! the library). [`units`] converts femtoseconds at the boundary.
//!
//! Module map:
//! - [`system`]: level systems, density matrices, Liouville-space indexing
//! - [`specfun`]: Faddeeva function `w(z)` and the imaginary error function
//! - [`fields`]: chirped Gaussian pulses and continuous-wave modes
//! - [`response`]: linear signals, generalized first-order susceptibility,
//!   and the time-domain quadrature oracle
//! - [`wavemixing`]: three- and four-wave-mixing signals, pathway sums, and
//!   the generalized third-order evaluator
//! - [`driven`]: driven three-level Bloch dynamics, steady states, rotating
//!   propagators, and drive-dressed probe spectra
//! - [`quad`]: adaptive Gauss-Kronrod quadrature used by the oracles
//! - [`eig`]: dense complex eigendecomposition for small matrices

pub mod eig;
pub mod error;
pub mod fields;
pub mod liouville;
pub mod quad;
pub mod response;
pub mod specfun;
pub mod system;
pub mod units;

pub mod driven;
pub mod wavemixing;

pub use driven::{
    build_liouvillian, dressed_frequencies, driven_equilibrium_signal, driven_signal,
    driven_time_domain_oracle, frame_transform, rotating_propagator, rotating_propagator_direct,
    steady_state, DressedSpectrum, DrivenSignal, DrivenSystem, Liouvillian,
};
pub use error::Error;
pub use fields::{ChirpedGaussianPulse, CwField, ModeSign};
pub use response::{
    linear_signal, time_domain_oracle, Component, LinearSignal, Preparation, SignalTrace,
};
pub use system::{DensityMatrix, LevelSystem, LiouvilleIndex};
pub use wavemixing::{
    chi3_pathway_fwm, chi3_pathway_fwm_prepared, fwm_signal_rwa, FwmScenario, FwmSignal,
    GaussianProbe, PathwayFamily, PathwayTerm,
};

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Result alias for fallible operations in this crate.
pub type Result<T> = std::result::Result<T, Error>;
