//! Frequency-domain input-output simulation of coupled-mode networks, built
//! around an atom-mediated optical/microwave converter.
//!
//! Every frequency and rate in this crate is dimensionless, measured in units
//! of the collective microwave coupling `g`. Times are in units of `1/g`.
//! Fields are treated as classical coherent amplitudes with Fourier
//! convention `e^{-iωt}`, and output fields follow `a_out = −√K a − a_in`.

pub mod analysis;
pub mod complexlin;
pub mod converter;
pub mod ensemble;
pub mod error;
pub mod format;
pub mod network;
pub mod scattering;
pub mod timedomain;

pub use complexlin::ComplexMatrix;
pub use error::{Error, Result};
pub use network::{CoupledModeNetwork, PortId};
pub use num_complex::Complex64;
