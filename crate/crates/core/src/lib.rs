//! Pseudospectral minimizing-movement solver for the slope-constrained
//! fourth-order evolution
//!
//! ```text
//! u_t = -[ H(u_x) + Phi_a'(u_xx) ]_xx   on [-pi, pi), periodic, zero mean,
//! ```
//!
//! where `H` is the periodic Hilbert transform and `Phi_a` is a logarithmic
//! barrier that keeps `u_xx + a > 0`.
//!
//! Modules, bottom up: [`spectral`] (grid, FFT, operators), [`energy`]
//! (potentials and functionals), [`variational`] (pairings and inequality
//! residuals), [`stepper`] (implicit steps and runs) and [`verification`]
//! (certificates for computed trajectories).

pub mod energy;
pub mod error;
pub mod exec;
pub mod spectral;
pub mod stepper;
pub mod variational;
pub mod verification;

pub use energy::{energy_total, BarrierParams, EnergyReport};
pub use error::{Error, Result};
pub use exec::Execution;
pub use spectral::{PeriodicGrid, SpectralField};
pub use stepper::{implicit_step, run_evolution, StepConfig, StepDiagnostics, Trajectory};
