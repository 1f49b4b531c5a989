//! Numerical toolkit for convex geometry of quantum states with a separable
//! subsystem: generalized Bloch-vector codecs, separability testing through
//! symmetric extensions, weak-membership / weak-validity oracles with a
//! cutting-plane solver, exact simulation of a three-test verification
//! protocol, and numeric certification of the quantitative lemmas behind it.
//!
//! Everything runs at desk scale (registers of total dimension <= 64) with
//! dense complex linear algebra and deterministic, seed-derived sampling.

pub mod bloch;
pub mod config;
pub mod error;
pub mod io;
pub mod lemmas;
pub mod linalg;
pub mod oracles;
pub mod protocol;
pub mod rng;
pub mod septest;

pub use bloch::{BlochVector, GeneratorBasis};
pub use config::Tolerances;
pub use error::CoreError;
pub use linalg::{ComplexMatrix, DensityMatrix, PureState, RegisterLayout, Role};

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
