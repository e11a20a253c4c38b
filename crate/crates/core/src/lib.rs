//! Simulation and verification toolkit for channel randomness induced by a
//! reconfigurable intelligent surface (RIS) in mmWave secret key
//! generation.
//!
//! The crate synthesizes the RIS reflection channel under three random
//! phase-shift schemes, compares empirical statistics with closed-form
//! predictions and estimates the secret key rate.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod rng;
pub mod special;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::{AnglePair, RisGeometry};
pub use weights::PhaseScheme;
