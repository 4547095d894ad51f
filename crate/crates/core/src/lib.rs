//! Gaussian continuous-variable toolkit for certifying maximally multipartite
//! entangled graph states and simulating teleportation teamwork over them.
//!
//! Covariance matrices use xxpp ordering with the vacuum normalized to the
//! identity.

pub mod circuits;
pub mod error;
pub mod graph;
pub mod mmes;
pub mod symplectic;
pub mod teamwork;
pub mod util;

pub use error::{Error, Result};
pub use symplectic::{CovarianceMatrix, SymplecticSpectrum};
