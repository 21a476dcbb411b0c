//! Spectral simulation and analysis of regional boundary gradient observers
//! for diffusion on the unit square with Neumann boundary conditions.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod observer;
pub mod sensing;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
