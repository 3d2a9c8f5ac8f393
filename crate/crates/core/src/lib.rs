//! Simulation of two-photon amplitude interference in a pulsed-pump type-II
//! down-conversion polarization interferometer.
//!
//! Coincidence rates are computed by summing the two-photon Feynman amplitudes
//! (both photons reflected or both transmitted at a polarizing beamsplitter)
//! over a joint-frequency grid, and checked against a closed-form Gaussian
//! [`oracle`].

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod elements;
pub mod error;
pub mod oracle;
pub mod pathsum;
pub mod presets;
pub mod scan;
pub mod spectral;
pub mod verify;

pub use config::{ExperimentConfig, GridSpec};
pub use error::{Error, Result};
pub use presets::{preset, PRESET_NAMES};
pub use scan::{ScanKind, ScanResult, ScanSettings};
