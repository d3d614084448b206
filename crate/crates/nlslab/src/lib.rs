//! Numerical laboratory for modified energies of the mass-critical NLS on 1d and 2d tori.

pub mod dynamics;
pub mod energies;
pub mod probes;
pub mod error;
pub mod resonance;
pub mod smoothing;
pub mod spectral;

pub use error::{Error, Result};
