//! Core numerics for hard-core boson lattices built from strongly coupled
//! units (dimers, tetramers, octamers).
//!
//! The crate is `no_std` with `alloc`. File formats, dense LAPACK solvers
//! and the command line live in the `hscar` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod hda;
pub mod hilbert;
pub mod krylov;
pub mod lattice;
pub mod linalg;
pub mod operator;
pub mod stats;
pub mod subspace;
pub mod symmetry;

pub use error::{Error, Result};
pub use hilbert::{BasisSector, FockState};
pub use lattice::{Boundary, CollectiveLabel, CollectiveStateSet, LatticeSpec};
pub use operator::SparseHamiltonian;
pub use subspace::{HoppingSums, SubspaceSplit};

pub use num_complex::Complex64;
