//! Desk-scale simulator of continuous-variable optical quantum information
//! protocols in the Gaussian formalism: teleportation, QND gates and small
//! cluster states, with exact moment propagation and a Monte-Carlo
//! homodyne-trajectory cross-check.

pub mod cluster;
pub mod dsl;
pub mod elements;
pub mod error;
pub mod gaussian;
pub mod mc;
pub mod protocols;
pub mod report;

pub use error::{Error, Result};
pub use gaussian::{GaussianState, LinearProcess, Quad, QuadratureForm, SymplecticOp};
