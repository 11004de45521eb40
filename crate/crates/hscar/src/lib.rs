//! Exact diagonalisation, quench dynamics and hypercube Green's functions for
//! Hilbert-space scars in hard-core boson lattices, plus the config-driven
//! experiment runner behind the `hscar` binary.

pub mod error;
pub mod lapack;
pub mod config;
pub mod experiments;
pub mod output;
pub mod spectral;

pub use error::{Error, Result};
pub use hscar_core as core;
