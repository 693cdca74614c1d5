//! Fast population inversion of a driven two-level system by rescaling the
//! time axis of a slow reference protocol.
//!
//! The reference drive is a hyperbolic-secant Rabi pulse with a tanh
//! detuning chirp. Compressing its time axis with a smooth monotone map
//! yields a shorter drive whose evolution operator reproduces the reference
//! one exactly, at the cost of a proportionally stronger pulse. This crate
//! implements:
//!
//! - [`rescale`]: the compression map, its derivative, numerical inverse,
//!   and validation of the boundary-matching properties,
//! - [`protocol`]: the reference and compressed drive waveforms, the
//!   two-level Hamiltonian, and its instantaneous eigensystem,
//! - [`propagate`]: exactly unitary integration of the Schrödinger
//!   equation, state trajectories, and phase-insensitive propagator
//!   comparison,
//! - [`robustness`]: fidelity under systematic amplitude and chirp errors,
//!   swept over error grids, with the square π-pulse closed form as a
//!   baseline,
//! - [`workstats`]: two-point-measurement work statistics (Gibbs initial
//!   state, work distribution, characteristic function, moments) and
//!   reference-versus-compressed equality reports,
//! - [`cli`]: the `trsta` command-line front end emitting plot-ready CSV
//!   and JSON files.

pub mod cli;
pub mod error;
pub mod mat2;
pub mod propagate;
pub mod protocol;
pub mod rescale;
pub mod robustness;
pub mod workstats;

pub use error::{Error, Result};
pub use propagate::{
    evolve, evolve_trajectory, propagator_distance, Propagator2, PureState2, TimeGrid,
    DEFAULT_STEPS,
};
pub use protocol::{
    eigensystem, hamiltonian, AeDrive, AeParams, Drive, DriveSample, Eigensystem2, TrDrive,
};
pub use rescale::RescaleMap;
pub use robustness::{fidelity, pi_pulse_fidelity, sweep, SweepKind, SweepResult, SweepSpec};
pub use workstats::{
    characteristic_function, compare_protocols, gibbs_probabilities, moments, transition_matrix,
    work_distribution, EqualityReport, ThermalSpec, WorkDistribution, WorkMoments,
};
