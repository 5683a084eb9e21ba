//! Planar Skorokhod embedding: builds the domain `U = G(D)` whose exit
//! distribution has a prescribed real part, checks the integrability
//! conditions that make the construction work, and verifies the embedding by
//! exact boundary sampling and by direct Brownian-motion simulation.

pub mod error;
pub mod geometry;
pub mod harmonic;
pub mod montecarlo;
pub mod quadrature;
pub mod quantile;
pub mod solvability;
pub mod stats;

pub use error::{Error, Result, TracePoint};
