//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by model evaluation, Fisher-information computation,
/// regularization, constraint shaping, estimation and the analysis drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite parameter at index {index}: {value}")]
    NonFiniteParameter { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("quadrature did not reach tolerance {tolerance:e} within {budget} panels")]
    QuadratureFailure { tolerance: f64, budget: usize },

    #[error("signal component {component} is {signal:e} but its gradient norm² is {gradient_norm2:e}")]
    SingularTerm {
        component: usize,
        signal: f64,
        gradient_norm2: f64,
    },

    #[error("Poisson truncation for mean {mean:e} exceeds the outcome budget")]
    TruncationBudgetExceeded { mean: f64 },

    #[error("Fisher matrix is singular (min eigenvalue {min_eigenvalue:e}, max {max_eigenvalue:e})")]
    SingularFim {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("empty domain: [{lower}, {upper}]")]
    EmptyDomain { lower: f64, upper: f64 },

    #[error("point {value} lies outside the domain [{lower}, {upper}]")]
    OutOfDomain { value: f64, lower: f64, upper: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("Gaussian kernel is singular or indefinite (min eigenvalue {min_eigenvalue:e}, max {max_eigenvalue:e})")]
    SingularKernel {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("no constraints supplied")]
    NoConstraint,

    #[error("shrinking did not converge within {budget} iterations (max violation {max_violation:e})")]
    IterationBudgetExceeded { budget: usize, max_violation: f64 },

    #[error("both constraints are active (P_lower = {p_lower:e}, P_upper = {p_upper:e})")]
    TwoActiveConstraints { p_lower: f64, p_upper: f64 },

    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("optimizer failure: {0}")]
    OptimizerFailure(String),

    #[error("Bayesian mean supports at most 2 parameters, got {0}")]
    DimensionTooLarge(usize),

    #[error("need at least 2 estimates, got {0}")]
    InsufficientSamples(usize),

    #[error("grid has {0} points, need at least 3")]
    GridTooCoarse(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
