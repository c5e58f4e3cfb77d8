//! Symbolic and numerical tools for the three-dimensional viscous primitive
//! equations on the torus driven by degenerate forcing: Lie-type saturation
//! of control directions, Galerkin simulation, control synthesis, Haar-type
//! noise, controllability Gramians and mixing diagnostics.

pub mod basis;
pub mod control;
pub mod error;
pub mod field;
pub mod galerkin;
pub mod gramian;
pub mod identities;
pub mod mixing;
pub mod noise;
pub mod operators;
pub mod saturation;
pub mod seeds;

pub use error::{PeError, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
