//! Spectral laboratory for the linearized and nonlinear Navier–Stokes–Cattaneo
//! system, its Navier–Stokes–Fourier limit and the associated toy models.

pub mod besov;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod model;
pub mod spectral;
pub mod studies;

pub use error::{Error, Result};
