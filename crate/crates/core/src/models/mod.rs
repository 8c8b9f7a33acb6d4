//! Forward signal models: parameters `θ` ↦ expected counts `S(θ)` and the
//! Jacobian `∂S/∂θ`.
//!
//! Four model families are provided behind [`SignalModel`]:
//!
//! * `Uniform1` – a uniform object probed by `n`-photon coincidences,
//!   `S(A) = N ηⁿ A²ⁿ`.
//! * `TwoPixel` – two transmission amplitudes seen by two detectors,
//!   `S₁ = N η² (h₀A₁² + h₁A₂²)²`, `S₂ = N η² (h₁A₁² + h₀A₂²)²`.
//! * `SlitArray` – `M` slits imaged with ideally correlated photon pairs
//!   through a sinc-shaped amplitude PSF; diagonal coincidences only.
//! * `BiphotonG2` – the same geometry with a finite transverse correlation
//!   length and the full coincidence matrix.
//!
//! Pixel `m` (zero based) of the slit models covers `[m·d, (m+1)·d]`.
//! Lengths are in the same units as `d_R`.

mod biphoton;
mod slit;

use std::ops::Deref;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use biphoton::{biphoton_g2_coeffs, G2Coefficients};
pub use slit::{sinc, slit_kernel_coeff, slit_kernel_coeff_at, SlitTable};

/// Momentum cut-off of the optical system in units of `1/d_R`.
pub const K_MAX_TIMES_DR: f64 = 3.83;

/// Ordered real parameters, optionally labelled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            labels: None,
        }
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                got: labels.len(),
            });
        }
        Ok(Self {
            values,
            labels: Some(labels),
        })
    }

    /// Check the invariants: at least one entry, all entries finite.
    pub fn validate(&self) -> Result<()> {
        check_finite(&self.values)
    }

    /// Labels, defaulting to `θ0, θ1, …`.
    pub fn label_list(&self) -> Vec<String> {
        self.labels
            .clone()
            .unwrap_or_else(|| default_labels(self.values.len()))
    }
}

impl Deref for ParameterVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("θ{i}")).collect()
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFiniteParameter {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Axis-aligned box `lower ≤ θ ≤ upper`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (l, u) in lower.iter().zip(&upper) {
            if l.is_nan() || u.is_nan() || l > u {
                return Err(Error::EmptyDomain {
                    lower: *l,
                    upper: *u,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The physical amplitude box `[0, 1]ⁿ`.
    pub fn unit(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            upper: vec![1.0; n],
        }
    }

    /// `[lower, upper]ⁿ` with the same bounds on every axis.
    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; n], vec![upper; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(t, (l, u))| t >= l && t <= u)
    }

    /// Clamp `theta` into the box in place.
    pub fn project(&self, theta: &mut [f64]) {
        for (t, (l, u)) in theta.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *t = t.clamp(*l, *u);
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.dim(),
            });
        }
        Ok(())
    }

    /// The box as `aᵀθ ≤ b` rows, upper bound before lower bound per axis;
    /// infinite bounds produce no row.
    pub fn linear_constraints(&self) -> Vec<crate::shaper::LinearConstraint> {
        let n = self.dim();
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            if self.upper[i].is_finite() {
                let mut a = vec![0.0; n];
                a[i] = 1.0;
                out.push(crate::shaper::LinearConstraint {
                    a,
                    b: self.upper[i],
                });
            }
            if self.lower[i].is_finite() {
                let mut a = vec![0.0; n];
                a[i] = -1.0;
                out.push(crate::shaper::LinearConstraint {
                    a,
                    b: -self.lower[i],
                });
            }
        }
        out
    }
}

/// Expected counts of every signal component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalVector {
    pub means: Vec<f64>,
}

impl Deref for SignalVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.means
    }
}

/// A forward model `θ ↦ S(θ)`.
///
/// Implementors must be pure and reentrant; every consumer in the crate
/// (Fisher information, regularization, estimators) goes through this trait.
pub trait SignalModel: Send + Sync {
    fn param_dim(&self) -> usize;

    fn signal_dim(&self) -> usize;

    fn signal(&self, theta: &[f64]) -> Result<SignalVector>;

    /// `∂S_i/∂θ_μ` as a `signal_dim × param_dim` matrix. Defaults to central
    /// finite differences.
    fn jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        finite_difference_jacobian(self, theta)
    }

    /// `S(θ)` and `Σ_μ ∂S_i/∂θ_μ v_μ`. Defaults to the Jacobian times `v`.
    fn signal_and_derivative(&self, theta: &[f64], v: &[f64]) -> Result<(SignalVector, Vec<f64>)> {
        let j = self.jacobian(theta)?;
        let d = j.row_iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
        Ok((self.signal(theta)?, d))
    }

    /// Physical parameter domain.
    fn domain(&self) -> BoxDomain {
        BoxDomain::unit(self.param_dim())
    }

    /// Closed-form constrained maximum-likelihood estimate, if one exists.
    fn closed_form_mle(&self, _counts: &[f64], _domain: &BoxDomain) -> Option<Vec<f64>> {
        None
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.param_dim(),
                got: theta.len(),
            });
        }
        check_finite(theta)
    }
}

/// Finite-difference step `h = max(1e-6, 1e-4·|θ|)`.
pub fn fd_step(theta: f64) -> f64 {
    (1e-4 * theta.abs()).max(1e-6)
}

/// Central finite-difference Jacobian of any model.
pub fn finite_difference_jacobian<M: SignalModel + ?Sized>(model: &M, theta: &[f64]) -> Result<DMatrix<f64>> {
    model.check_theta(theta)?;
    let n = theta.len();
    let m = model.signal_dim();
    let mut jac = DMatrix::zeros(m, n);
    let mut probe = theta.to_vec();
    for mu in 0..n {
        let h = fd_step(theta[mu]);
        probe[mu] = theta[mu] + h;
        let plus = model.signal(&probe)?;
        probe[mu] = theta[mu] - h;
        let minus = model.signal(&probe)?;
        probe[mu] = theta[mu];
        for i in 0..m {
            jac[(i, mu)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn two() -> f64 {
    2.0
}

/// Placement of the detector positions `x_j = j·step` used by the slit models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorGrid {
    /// Step in units of the pixel width `d`.
    #[serde(default = "half")]
    pub step: f64,
    /// Extension beyond the object support on each side, in units of `d_R`.
    #[serde(default = "two")]
    pub margin: f64,
}

impl Default for DetectorGrid {
    fn default() -> Self {
        Self {
            step: 0.5,
            margin: 2.0,
        }
    }
}

impl DetectorGrid {
    /// Detector positions for `pixels` slits of width `d`.
    pub fn positions(&self, pixels: usize, d: f64, d_r: f64) -> Vec<f64> {
        let step = self.step * d;
        let lo = (-self.margin * d_r / step).ceil() as i64;
        let hi = ((pixels as f64 * d + self.margin * d_r) / step).floor() as i64;
        (lo..=hi).map(|j| j as f64 * step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uniform1Spec {
    /// Mean number of emitted photon groups.
    #[serde(rename = "N")]
    pub n_mean: f64,
    /// Collection efficiency.
    pub eta: f64,
    /// Photons per group.
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPixelSpec {
    #[serde(rename = "N")]
    pub n_mean: f64,
    pub eta: f64,
    pub h0: f64,
    pub h1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlitArraySpec {
    /// Expected total coincidences for a fully transparent object.
    #[serde(rename = "N")]
    pub n_mean: f64,
    /// Number of slits.
    #[serde(rename = "M")]
    pub pixels: usize,
    /// Slit width.
    pub d: f64,
    /// Rayleigh limit.
    #[serde(rename = "d_R", default = "one")]
    pub d_r: f64,
    #[serde(default)]
    pub grid: DetectorGrid,
}

impl SlitArraySpec {
    pub fn k_max(&self) -> f64 {
        K_MAX_TIMES_DR / self.d_r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiphotonG2Spec {
    /// Expected total coincidences for a fully transparent object.
    #[serde(rename = "N")]
    pub n_mean: f64,
    #[serde(rename = "M")]
    pub pixels: usize,
    pub d: f64,
    #[serde(rename = "d_R", default = "one")]
    pub d_r: f64,
    /// Transverse correlation length of the photon pairs.
    pub sigma_c: f64,
    #[serde(default)]
    pub grid: DetectorGrid,
}

impl BiphotonG2Spec {
    pub fn k_max(&self) -> f64 {
        K_MAX_TIMES_DR / self.d_r
    }
}

/// Serializable model description, `{"variant": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params")]
pub enum ModelSpec {
    Uniform1(Uniform1Spec),
    TwoPixel(TwoPixelSpec),
    SlitArray(SlitArraySpec),
    BiphotonG2(BiphotonG2Spec),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_grid(grid: &DetectorGrid) -> Result<()> {
    positive("grid.step", grid.step)?;
    if !(grid.margin.is_finite() && grid.margin >= 0.0) {
        return Err(Error::Config(format!("grid.margin must be ≥ 0, got {}", grid.margin)));
    }
    Ok(())
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Uniform1(s) => {
                positive("N", s.n_mean)?;
                if !(s.eta > 0.0 && s.eta <= 1.0) {
                    return Err(Error::Config(format!("eta must lie in (0, 1], got {}", s.eta)));
                }
                if s.n < 1 {
                    return Err(Error::Config("n must be at least 1".into()));
                }
            }
            ModelSpec::TwoPixel(s) => {
                positive("N", s.n_mean)?;
                if !(s.eta > 0.0 && s.eta <= 1.0) {
                    return Err(Error::Config(format!("eta must lie in (0, 1], got {}", s.eta)));
                }
                if !s.h0.is_finite() || !s.h1.is_finite() {
                    return Err(Error::Config("h0 and h1 must be finite".into()));
                }
            }
            ModelSpec::SlitArray(s) => {
                positive("N", s.n_mean)?;
                positive("d", s.d)?;
                positive("d_R", s.d_r)?;
                if s.pixels < 1 {
                    return Err(Error::Config("M must be at least 1".into()));
                }
                check_grid(&s.grid)?;
            }
            ModelSpec::BiphotonG2(s) => {
                positive("N", s.n_mean)?;
                positive("d", s.d)?;
                positive("d_R", s.d_r)?;
                positive("sigma_c", s.sigma_c)?;
                if s.pixels < 1 {
                    return Err(Error::Config("M must be at least 1".into()));
                }
                check_grid(&s.grid)?;
            }
        }
        Ok(())
    }

    pub fn param_dim(&self) -> usize {
        match self {
            ModelSpec::Uniform1(_) => 1,
            ModelSpec::TwoPixel(_) => 2,
            ModelSpec::SlitArray(s) => s.pixels,
            ModelSpec::BiphotonG2(s) => s.pixels,
        }
    }

    /// Same model with the pixel width replaced (slit models only).
    pub fn with_pixel_width(&self, d: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ModelSpec::SlitArray(s) => s.d = d,
            ModelSpec::BiphotonG2(s) => s.d = d,
            _ => {}
        }
        out
    }

    /// Same model with the count scale `N` replaced.
    pub fn with_counts(&self, n: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ModelSpec::Uniform1(s) => s.n_mean = n,
            ModelSpec::TwoPixel(s) => s.n_mean = n,
            ModelSpec::SlitArray(s) => s.n_mean = n,
            ModelSpec::BiphotonG2(s) => s.n_mean = n,
        }
        out
    }

    /// Rayleigh limit for slit models, `None` otherwise.
    pub fn rayleigh(&self) -> Option<f64> {
        match self {
            ModelSpec::SlitArray(s) => Some(s.d_r),
            ModelSpec::BiphotonG2(s) => Some(s.d_r),
            _ => None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Uniform1 { scale: f64, n: u32 },
    TwoPixel { scale: f64, h0: f64, h1: f64 },
    Slit(SlitTable),
    G2(G2Coefficients),
}

/// A validated, ready-to-evaluate model built from a [`ModelSpec`].
///
/// Coefficient tables of the slit models are computed once here and are
/// immutable afterwards.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    kind: Kind,
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let kind = match &spec {
            ModelSpec::Uniform1(s) => Kind::Uniform1 {
                scale: s.n_mean * s.eta.powi(s.n as i32),
                n: s.n,
            },
            ModelSpec::TwoPixel(s) => Kind::TwoPixel {
                scale: s.n_mean * s.eta * s.eta,
                h0: s.h0,
                h1: s.h1,
            },
            ModelSpec::SlitArray(s) => Kind::Slit(SlitTable::new(s)?),
            ModelSpec::BiphotonG2(s) => Kind::G2(biphoton_g2_coeffs(s)?),
        };
        Ok(Self { spec, kind })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn slit_table(&self) -> Option<&SlitTable> {
        match &self.kind {
            Kind::Slit(t) => Some(t),
            _ => None,
        }
    }

    pub fn g2_coefficients(&self) -> Option<&G2Coefficients> {
        match &self.kind {
            Kind::G2(c) => Some(c),
            _ => None,
        }
    }
}

impl SignalModel for Model {
    fn param_dim(&self) -> usize {
        self.spec.param_dim()
    }

    fn signal_dim(&self) -> usize {
        match &self.kind {
            Kind::Uniform1 { .. } => 1,
            Kind::TwoPixel { .. } => 2,
            Kind::Slit(t) => t.detectors.len(),
            Kind::G2(c) => c.signal_dim(),
        }
    }

    fn signal(&self, theta: &[f64]) -> Result<SignalVector> {
        self.check_theta(theta)?;
        let means = match &self.kind {
            Kind::Uniform1 { scale, n } => vec![scale * theta[0].powi(2 * *n as i32)],
            Kind::TwoPixel { scale, h0, h1 } => {
                let (a1, a2) = (theta[0] * theta[0], theta[1] * theta[1]);
                let u1 = h0 * a1 + h1 * a2;
                let u2 = h1 * a1 + h0 * a2;
                vec![scale * u1 * u1, scale * u2 * u2]
            }
            Kind::Slit(t) => t.signal(theta),
            Kind::G2(c) => c.signal(theta),
        };
        Ok(SignalVector { means })
    }

    fn jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_theta(theta)?;
        Ok(match &self.kind {
            Kind::Uniform1 { scale, n } => {
                let n = *n as i32;
                DMatrix::from_element(1, 1, 2.0 * n as f64 * scale * theta[0].powi(2 * n - 1))
            }
            Kind::TwoPixel { scale, h0, h1 } => {
                let (x, y) = (theta[0], theta[1]);
                let u1 = h0 * x * x + h1 * y * y;
                let u2 = h1 * x * x + h0 * y * y;
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        4.0 * scale * u1 * h0 * x,
                        4.0 * scale * u1 * h1 * y,
                        4.0 * scale * u2 * h1 * x,
                        4.0 * scale * u2 * h0 * y,
                    ],
                )
            }
            Kind::Slit(t) => t.jacobian(theta),
            Kind::G2(c) => c.jacobian(theta),
        })
    }

    fn signal_and_derivative(&self, theta: &[f64], v: &[f64]) -> Result<(SignalVector, Vec<f64>)> {
        if let Kind::G2(c) = &self.kind {
            self.check_theta(theta)?;
            if v.len() != theta.len() {
                return Err(Error::DimensionMismatch {
                    expected: theta.len(),
                    got: v.len(),
                });
            }
            let (means, d) = c.signal_and_derivative(theta, v);
            return Ok((SignalVector { means }, d));
        }
        let j = self.jacobian(theta)?;
        let d = j.row_iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
        Ok((self.signal(theta)?, d))
    }

    fn closed_form_mle(&self, counts: &[f64], domain: &BoxDomain) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Uniform1 { scale, n } => {
                let root = (counts[0] / scale).powf(1.0 / (2.0 * *n as f64));
                Some(vec![root.clamp(domain.lower[0], domain.upper[0])])
            }
            _ => None,
        }
    }
}

/// Evaluate `S(θ)`.
pub fn eval_signal<M: SignalModel + ?Sized>(model: &M, theta: &[f64]) -> Result<SignalVector> {
    model.signal(theta)
}

/// Evaluate `∂S/∂θ`.
pub fn eval_jacobian<M: SignalModel + ?Sized>(model: &M, theta: &[f64]) -> Result<DMatrix<f64>> {
    model.jacobian(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn uniform(n_mean: f64, eta: f64, n: u32) -> Model {
        Model::new(ModelSpec::Uniform1(Uniform1Spec { n_mean, eta, n })).unwrap()
    }

    pub(crate) fn two_pixel(n_mean: f64) -> Model {
        Model::new(ModelSpec::TwoPixel(TwoPixelSpec {
            n_mean,
            eta: 0.7,
            h0: 1.0,
            h1: 0.8,
        }))
        .unwrap()
    }

    fn slit(d: f64) -> Model {
        Model::new(ModelSpec::SlitArray(SlitArraySpec {
            n_mean: 1e4,
            pixels: 4,
            d,
            d_r: 1.0,
            grid: DetectorGrid::default(),
        }))
        .unwrap()
    }

    fn g2(d: f64, sigma_c: f64) -> Model {
        Model::new(ModelSpec::BiphotonG2(BiphotonG2Spec {
            n_mean: 1e5,
            pixels: 4,
            d,
            d_r: 1.0,
            sigma_c,
            grid: DetectorGrid::default(),
        }))
        .unwrap()
    }

    #[test]
    fn uniform_signal_values() {
        let m = uniform(200.0, 0.7, 2);
        assert_eq!(m.signal(&[0.0]).unwrap()[0], 0.0);
        assert!((m.signal(&[0.5]).unwrap()[0] - 6.125).abs() < 1e-12);
        assert!((m.jacobian(&[0.5]).unwrap()[(0, 0)] - 49.0).abs() < 1e-12);
        assert_eq!(m.jacobian(&[0.0]).unwrap()[(0, 0)], 0.0);
    }

    #[test]
    fn two_pixel_signal_values() {
        let m = two_pixel(1000.0);
        let s = m.signal(&[0.5, 0.5]).unwrap();
        assert!((s[0] - 99.225).abs() < 1e-10);
        assert!((s[1] - 99.225).abs() < 1e-10);
        let j = m.jacobian(&[0.5, 0.5]).unwrap();
        assert!((j[(0, 0)] - 441.0).abs() < 1e-10);
    }

    #[test]
    fn errors_on_bad_input() {
        let m = two_pixel(1000.0);
        assert!(matches!(m.signal(&[0.5]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            m.signal(&[0.5, f64::NAN]),
            Err(Error::NonFiniteParameter { index: 1, .. })
        ));
        let bad = ModelSpec::Uniform1(Uniform1Spec {
            n_mean: 1.0,
            eta: 1.5,
            n: 2,
        });
        assert!(matches!(Model::new(bad), Err(Error::Config(_))));
    }

    #[test]
    fn log_log_slope_of_uniform_model() {
        for n in 1..=4u32 {
            let m = uniform(200.0, 0.7, n);
            let (a, b) = (0.3, 0.6);
            let slope = (m.signal(&[b]).unwrap()[0] / m.signal(&[a]).unwrap()[0]).ln() / (b / a as f64).ln();
            assert!((slope - 2.0 * n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn json_schema_round_trip() {
        let text = r#"{"variant":"SlitArray","params":{"N":10000,"M":10,"d":0.5}}"#;
        let spec = ModelSpec::from_json(text).unwrap();
        match &spec {
            ModelSpec::SlitArray(s) => {
                assert_eq!(s.pixels, 10);
                assert_eq!(s.d_r, 1.0);
                assert_eq!(s.grid, DetectorGrid::default());
            }
            _ => panic!("wrong variant"),
        }
        let again: ModelSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);
        assert!(ModelSpec::from_json(r#"{"variant":"TwoPixel","params":{"N":-1,"eta":0.7,"h0":1,"h1":0.8}}"#).is_err());
    }

    fn check_fd(model: &Model, theta: &[f64]) {
        let j = model.jacobian(theta).unwrap();
        let fd = finite_difference_jacobian(model, theta).unwrap();
        let scale = j.amax().max(1e-300);
        for (a, b) in j.iter().zip(fd.iter()) {
            assert!((a - b).abs() <= 1e-5 * scale, "analytic {a} vs fd {b}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn analytic_jacobians_match_finite_differences(a in 0.05f64..0.95, b in 0.05f64..0.95) {
            check_fd(&uniform(200.0, 0.7, 2), &[a]);
            check_fd(&uniform(50.0, 0.9, 3), &[b]);
            check_fd(&two_pixel(1000.0), &[a, b]);
        }

        #[test]
        fn signals_are_nonnegative(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            prop_assert!(uniform(200.0, 0.7, 2).signal(&[a]).unwrap()[0] >= 0.0);
            let s = two_pixel(1000.0).signal(&[a, b]).unwrap();
            prop_assert!(s.iter().all(|v| *v >= 0.0 && v.is_finite()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn slit_models_jacobian_and_positivity(
            a in proptest::collection::vec(0.05f64..0.95, 4),
        ) {
            let sm = slit(0.5);
            prop_assert!(sm.signal(&a).unwrap().iter().all(|v| *v >= 0.0));
            check_fd(&sm, &a);
        }
    }

    #[test]
    fn g2_jacobian_matches_finite_differences() {
        let m = g2(0.4, 0.1);
        for theta in [[0.2, 0.9, 0.5, 0.7], [0.8, 0.1, 0.3, 0.6]] {
            assert!(m.signal(&theta).unwrap().iter().all(|v| *v >= 0.0));
            check_fd(&m, &theta);
        }
    }
}
