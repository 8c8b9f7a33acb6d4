//! Cramér–Rao error estimates for photon-counting imaging with physical
//! parameter constraints.
//!
//! The crate computes Fisher information for Poisson-limited signal models,
//! regularizes it where it is singular, corrects it for box constraints on
//! the parameters, and compares the resulting predictions with Monte Carlo
//! estimators.
//!
//! * [`models`] – forward models and their Jacobians.
//! * [`fisher`] – Fisher information and scalar summaries.
//! * [`regularizer`] – finite-probe regularization of singular information.
//! * [`shaper`] – iterative shrinking of a Gaussian approximation into a
//!   constrained domain.
//! * [`estimators`] – sampling, maximum likelihood, posterior mean and Monte
//!   Carlo statistics.
//! * [`analysis`] – the reproducible sweeps (error curves, scatter plots,
//!   resolution scans) and their CSV/JSON/SVG writers.
//!
//! The `examples/` directory of the crate has one runnable program per
//! capability.

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod fisher;
pub mod linalg;
pub mod models;
pub mod quadrature;
pub mod regularizer;
pub mod shaper;
pub mod special;

pub use error::{Error, Result};
