//! Spectral laboratory for the 3D periodic stochastic MHD system driven by
//! space-time white noise: approximation operators, the Gaussian linear level,
//! Wick renormalization constants, the mild-solution hierarchy and experiment drivers.

pub mod error;
pub mod bony;
pub mod commands;
pub mod config;
pub mod fields;
pub mod hierarchy;
pub mod io;
pub mod lab;
pub mod schemes;
pub mod torus_spectral;
pub mod wick_renorm;

pub use error::{LabError, Result};
