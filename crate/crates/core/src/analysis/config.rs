//! JSON configurations of the analysis commands.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelSpec, TwoPixelSpec, Uniform1Spec};
use crate::regularizer::ProbeRange;

/// Read and parse a JSON config file.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn strictly_increasing(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("{name} must not be empty")));
    }
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("{name} must be finite and strictly increasing")));
    }
    Ok(())
}

fn default_seed() -> u64 {
    20_240_601
}

fn default_threshold() -> f64 {
    0.1
}

/// Uniform grid `start, start + h, …, stop` with `points` entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl UniformGrid {
    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| self.start + (self.stop - self.start) * (i as f64 / n))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 3 {
            return Err(Error::GridTooCoarse(self.points));
        }
        strictly_increasing("grid", &[self.start, self.stop])
    }
}

/// Settings of `error-curve` (one-parameter model).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurveConfig {
    pub model: ModelSpec,
    pub grid: UniformGrid,
    /// Monte Carlo samples per grid point.
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Range of the embedded unbiased-regime check.
    #[serde(default = "ErrorCurveConfig::default_region")]
    pub region: [f64; 2],
}

impl ErrorCurveConfig {
    fn default_region() -> [f64; 2] {
        [0.35, 0.85]
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.model.param_dim() != 1 {
            return Err(Error::Config("error-curve needs a one-parameter model".into()));
        }
        self.grid.validate()?;
        if self.samples < 2 {
            return Err(Error::InsufficientSamples(self.samples));
        }
        Ok(())
    }
}

impl Default for ErrorCurveConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::Uniform1(Uniform1Spec {
                n_mean: 200.0,
                eta: 0.7,
                n: 2,
            }),
            grid: UniformGrid {
                start: 0.0,
                stop: 1.0,
                points: 41,
            },
            samples: crate::estimators::BATCH_1D,
            seed: default_seed(),
            region: Self::default_region(),
        }
    }
}

/// One true point of the two-parameter study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterCase {
    pub theta: [f64; 2],
    #[serde(rename = "N")]
    pub n_mean: f64,
}

/// Settings of `scatter-2d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatter2dConfig {
    pub model: ModelSpec,
    pub cases: Vec<ScatterCase>,
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Scatter2dConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.model.param_dim() != 2 {
            return Err(Error::Config("scatter-2d needs a two-parameter model".into()));
        }
        if self.samples < 2 {
            return Err(Error::InsufficientSamples(self.samples));
        }
        for c in &self.cases {
            self.model.with_counts(c.n_mean).validate()?;
        }
        Ok(())
    }
}

impl Default for Scatter2dConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::TwoPixel(TwoPixelSpec {
                n_mean: 1000.0,
                eta: 0.7,
                h0: 1.0,
                h1: 0.8,
            }),
            cases: vec![
                ScatterCase {
                    theta: [0.2, 0.2],
                    n_mean: 1000.0,
                },
                ScatterCase {
                    theta: [0.5, 0.5],
                    n_mean: 1000.0,
                },
                ScatterCase {
                    theta: [0.9, 0.9],
                    n_mean: 50.0,
                },
            ],
            samples: crate::estimators::BATCH_2D,
            seed: default_seed(),
        }
    }
}

/// Overlapping parameter windows for large problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Parameters per window, at most 24.
    pub size: usize,
    /// Parameters shared by neighbouring windows.
    pub overlap: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { size: 24, overlap: 4 }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 || self.size > 24 || 2 * self.overlap >= self.size {
            return Err(Error::Config("windows need 1 ≤ size ≤ 24 and 2·overlap < size".into()));
        }
        Ok(())
    }
}

/// Reference values quoted next to a scan, never asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub label: String,
    pub d_over_dr: f64,
}

/// Settings of `resolution-scan`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Slit-array or biphoton model; its pixel width is replaced by each grid
    /// value times `d_R`.
    pub model: ModelSpec,
    /// `d/d_R` values.
    pub grid: Vec<f64>,
    /// True transmission amplitudes, one per pixel.
    pub object: Vec<f64>,
    /// Overrides the model's `N`.
    #[serde(rename = "N", default)]
    pub n_mean: Option<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Monte Carlo samples per grid point; `0` skips the simulation.
    #[serde(default)]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default = "ScanConfig::default_probe_range")]
    pub probe_range: ProbeRange,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
}

impl ScanConfig {
    fn default_probe_range() -> ProbeRange {
        ProbeRange::DomainOrExtent
    }

    pub fn validate(&self) -> Result<()> {
        let model = self.base_model();
        model.validate()?;
        if !matches!(model, ModelSpec::SlitArray(_) | ModelSpec::BiphotonG2(_)) {
            return Err(Error::Config("resolution-scan needs a SlitArray or BiphotonG2 model".into()));
        }
        strictly_increasing("grid", &self.grid)?;
        if self.grid[0] <= 0.0 {
            return Err(Error::Config("grid values must be positive".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Config("threshold must be positive".into()));
        }
        if self.object.len() != model.param_dim() {
            return Err(Error::DimensionMismatch {
                expected: model.param_dim(),
                got: self.object.len(),
            });
        }
        if self.object.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::Config("object amplitudes must lie in [0, 1]".into()));
        }
        if self.samples == 1 {
            return Err(Error::InsufficientSamples(1));
        }
        self.window.validate()
    }

    /// The model with `N` overridden.
    pub fn base_model(&self) -> ModelSpec {
        match self.n_mean {
            Some(n) => self.model.with_counts(n),
            None => self.model.clone(),
        }
    }

    /// The model at grid value `d/d_R`.
    pub fn model_at(&self, d_over_dr: f64) -> ModelSpec {
        let base = self.base_model();
        let d_r = base.rayleigh().unwrap_or(1.0);
        base.with_pixel_width(d_over_dr * d_r)
    }
}

/// Settings of `fim-report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FimReportConfig {
    pub model: ModelSpec,
    pub theta: Vec<f64>,
    #[serde(default = "ScanConfig::default_probe_range")]
    pub probe_range: ProbeRange,
}

impl Default for FimReportConfig {
    fn default() -> Self {
        Self {
            model: ErrorCurveConfig::default().model,
            theta: vec![0.5],
            probe_range: ProbeRange::DomainOrExtent,
        }
    }
}

/// Settings of `ellipse`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipseConfig {
    /// Symmetric positive-definite 2×2 kernel, row-major rows.
    pub kernel: [[f64; 2]; 2],
    pub center: [f64; 2],
}

impl Default for EllipseConfig {
    fn default() -> Self {
        Self {
            kernel: [[1.0, 0.0], [0.0, 1.0]],
            center: [0.0, 0.0],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_hits_both_ends() {
        let g = UniformGrid {
            start: 0.0,
            stop: 1.0,
            points: 21,
        };
        let v = g.values();
        assert_eq!((v[0], v[20]), (0.0, 1.0));
        assert!((v[7] - 0.35).abs() < 1e-15);
        assert!(UniformGrid { points: 2, ..g }.validate().is_err());
    }

    #[test]
    fn scan_config_is_checked() {
        let text = r#"{
            "model": {"variant": "SlitArray", "params": {"N": 10000, "M": 3, "d": 0.5}},
            "grid": [0.3, 0.5],
            "object": [1, 0.5, 1]
        }"#;
        let c: ScanConfig = serde_json::from_str(text).unwrap();
        c.validate().unwrap();
        assert_eq!(c.threshold, 0.1);
        assert_eq!(c.probe_range, ProbeRange::DomainOrExtent);
        let mut bad = c.clone();
        bad.grid = vec![0.5, 0.3];
        assert!(bad.validate().is_err());
        let mut bad = c.clone();
        bad.threshold = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = c;
        bad.object.push(1.0);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn defaults_validate() {
        ErrorCurveConfig::default().validate().unwrap();
        Scatter2dConfig::default().validate().unwrap();
    }
}
