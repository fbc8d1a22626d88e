//! Rate-distortion-leakage regions for lossy source coding with a helper.
//!
//! A source `X` is described to a decoder that sees side information `Y`,
//! while an eavesdropper sees `Z` and everything sent on the public link. The
//! crate evaluates exact information measures on small discrete models,
//! closed-form regions for Gaussian chains, grid searches over auxiliary
//! channels, and finite-blocklength simulations of the coding schemes.

pub mod error;
pub mod exec;
pub mod frontier;
pub mod measures;
pub mod model;
pub mod numfmt;
pub mod regions_discrete;
pub mod regions_gaussian;
pub mod schemesim;

pub use error::{Error, Result};
