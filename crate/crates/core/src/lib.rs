//! Exact reduction of multiple-relaxation-times lattice Boltzmann schemes to
//! finite-difference schemes on the conserved moments, and derivation of
//! their macroscopic equations under acoustic scaling.

pub mod algebra;
pub mod error;

pub use error::{Error, Result};
pub mod jet;
pub mod matrix;
pub mod scheme;
pub mod fdreduce;
pub mod series;
pub mod macroderive;
pub mod maxwell;
pub mod numeric;
pub mod schemefile;
