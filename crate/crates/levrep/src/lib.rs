//! Spectral statistics of classically integrable systems under parametric
//! ensemble averaging.
//!
//! Two exactly solvable models are provided — the rectangular hard-wall
//! billiard and a modified Kepler potential — together with the machinery to
//! build large deterministic ensembles of unfolded spectra at a fixed running
//! energy, measure their statistics (nearest-neighbour spacings, cumulative
//! small-s weight, level number variance, two-point kernel), and compare them
//! against closed-form theory curves.
//!
//! Layering:
//!
//! - [`scalar`]: the float abstraction; all closed-form math is generic over
//!   [`scalar::Scalar`] (`f32` or `f64`).
//! - [`models`]: closed-form theory (sine integral, repulsion kernels, spacing
//!   laws, number-variance sums).
//! - [`spectra`]: exact eigenvalues, Weyl-type unfolding, window enumeration.
//! - [`ensemble`]: experiment description and counter-based parameter
//!   sampling (bitwise reproducible, shardable).
//! - [`stats`]: counting estimators built on exact integer accumulators so
//!   that results are independent of worker count and member order.
//! - [`fit`]: parameter recovery (repulsion scale, 1/sqrt(energy)
//!   coefficient).

pub mod ensemble;
mod error;
pub mod fit;
pub mod models;
pub mod quad;
pub mod scalar;
pub mod spectra;
pub mod stats;

pub use error::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Concrete scalar the simulation pipeline runs at.
///
/// The closed-form layer is generic over [`scalar::Scalar`]; everything that
/// touches ensembles, histograms or files is pinned to this alias.
pub type Real = f64;
