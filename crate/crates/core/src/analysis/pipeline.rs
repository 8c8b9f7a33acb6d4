//! Standard, regularized and corrected information at one parameter point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{fim_poisson, fim_poisson_along, FisherMatrix};
use crate::linalg::sym_eigen;
use crate::models::{BoxDomain, SignalModel};
use crate::regularizer::{regularize_along_axes_with, ProbeRange};
use crate::shaper::{box_constraints, correct_fim, ShrinkReport};

/// The three information matrices and their total variances.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveFim {
    pub standard: FisherMatrix,
    pub regularized: FisherMatrix,
    pub corrected: FisherMatrix,
    /// Centre of the shrunk Gaussian.
    pub center: Vec<f64>,
    pub report: ShrinkReport,
    /// `Tr F⁻¹`, `None` when `F` is singular.
    pub trace_standard: Option<f64>,
    pub trace_regularized: f64,
    pub trace_corrected: f64,
}

/// `Tr F⁻¹`, mapping a singular matrix to `None`.
pub fn trace_or_singular(f: &FisherMatrix) -> Result<Option<f64>> {
    match f.total_variance() {
        Ok(v) => Ok(Some(v)),
        Err(Error::SingularFim { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Poisson FIM at `θ`, regularized along its eigen-axes and then corrected
/// against the box constraints.
pub fn effective_fim<M: SignalModel + ?Sized>(model: &M, theta: &[f64], domain: &BoxDomain) -> Result<EffectiveFim> {
    effective_fim_with(model, theta, domain, ProbeRange::Domain)
}

/// [`effective_fim`] with an explicit regularization probe range.
pub fn effective_fim_with<M: SignalModel + ?Sized>(
    model: &M,
    theta: &[f64],
    domain: &BoxDomain,
    range: ProbeRange,
) -> Result<EffectiveFim> {
    let standard = fim_poisson(model, theta)?;
    let (regularized, _) = regularize_along_axes_with(
        &standard,
        |t, v| fim_poisson_along(model, t, v.as_slice()),
        theta,
        domain,
        range,
    )?;
    let (corrected, center, report) = correct_fim(&regularized, theta, &box_constraints(domain))?;
    let trace_standard = trace_or_singular(&standard)?;
    let trace_regularized = regularized.total_variance()?;
    let trace_corrected = corrected.total_variance()?;
    Ok(EffectiveFim {
        standard,
        regularized,
        corrected,
        center,
        report,
        trace_standard,
        trace_regularized,
        trace_corrected,
    })
}

/// Eigenvalues in ascending order.
pub fn eigenvalues(f: &FisherMatrix) -> Vec<f64> {
    sym_eigen(&f.matrix).values.iter().copied().collect()
}

/// `Tr` of a covariance given as rows.
pub fn covariance_trace(cov: &[Vec<f64>]) -> f64 {
    cov.iter().enumerate().map(|(i, r)| r[i]).sum()
}

/// Summary numbers written next to every scan row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Traces {
    pub standard: Option<f64>,
    pub regularized: f64,
    pub corrected: f64,
}

impl From<&EffectiveFim> for Traces {
    fn from(e: &EffectiveFim) -> Self {
        Self {
            standard: e.trace_standard,
            regularized: e.trace_regularized,
            corrected: e.trace_corrected,
        }
    }
}
