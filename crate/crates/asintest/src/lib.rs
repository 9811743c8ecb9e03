//! Second-level arcsine-law testing of pseudorandom bit generators.
//!
//! The pipeline turns a bit generator into a verdict in three stages:
//!
//! 1. [`walk`] folds each n-bit output into a simple random walk and the
//!    fraction of steps spent above the axis (the arcsine statistic).
//! 2. [`arcsine`] supplies the limiting arcsine law, its finite-n exact
//!    counterpart, and the Berry-Esseen bound separating the two.
//! 3. [`secondlevel`] bins m independent statistics against the theoretical
//!    cell measure and applies a chi-square goodness-of-fit test plus a
//!    total-variation sanity threshold.
//!
//! [`prng`] holds the classical generators under test, [`dyck`] the
//! adversarial generator family built from resampled Dyck paths, and
//! [`campaign`] / [`report`] the batch driver and its serialized output.
//!
//! Floating-point kernels are generic over the [`Float`] scalar trait;
//! pipeline structs use the crate-level [`Real`] alias. Paths that the
//! contracts require to be exact use rationals instead (see
//! [`walk::Walk::above_fraction`] and [`arcsine::sojourn_prob_exact`]).

pub mod arcsine;
pub mod campaign;
pub mod dyck;
pub mod prng;
pub mod report;
pub mod secondlevel;
pub mod special;
pub mod walk;

mod error;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Float;

/// Concrete scalar used by the test pipeline and all reported figures.
pub type Real = f64;
