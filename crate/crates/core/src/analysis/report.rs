//! `fim-report` and `ellipse`: single-point dumps.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{fim_poisson, FisherMatrix};
use crate::models::{BoxDomain, Model, ModelSpec, SignalModel};
use crate::shaper::ShrinkReport;

use super::config::{EllipseConfig, FimReportConfig};
use super::ellipse::{ellipse_from_quadratic_form, EllipseSpec};
use super::pipeline::{effective_fim_with, eigenvalues, trace_or_singular};
use super::svg::{Plot, Series, Style};
use super::write_json;

/// Everything known about the information at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FimReport {
    pub model: ModelSpec,
    pub theta: Vec<f64>,
    pub standard: FisherMatrix,
    /// Ascending.
    pub standard_eigenvalues: Vec<f64>,
    pub trace_standard: Option<f64>,
    pub regularized: Option<FisherMatrix>,
    pub regularized_eigenvalues: Option<Vec<f64>>,
    pub trace_regularized: Option<f64>,
    pub corrected: Option<FisherMatrix>,
    pub corrected_center: Option<Vec<f64>>,
    pub trace_corrected: Option<f64>,
    pub shrink_report: Option<ShrinkReport>,
    /// Why the regularized or corrected part is missing.
    pub note: Option<String>,
}

impl FimReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Write `fim_report.json`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("fim_report.json");
        write_json(&path, self)?;
        Ok(vec![path])
    }
}

/// Build the report of `cfg.model` at `cfg.theta` on the unit box.
pub fn fim_report(cfg: &FimReportConfig) -> Result<FimReport> {
    cfg.model.validate()?;
    let model = Model::new(cfg.model.clone())?;
    model.check_theta(&cfg.theta)?;
    let domain = BoxDomain::unit(cfg.theta.len());
    if !domain.contains(&cfg.theta) {
        return Err(Error::Config("theta must lie in [0, 1] per component".into()));
    }
    let standard = fim_poisson(&model, &cfg.theta)?;
    let mut report = FimReport {
        model: cfg.model.clone(),
        theta: cfg.theta.clone(),
        standard_eigenvalues: eigenvalues(&standard),
        trace_standard: trace_or_singular(&standard)?,
        standard,
        regularized: None,
        regularized_eigenvalues: None,
        trace_regularized: None,
        corrected: None,
        corrected_center: None,
        trace_corrected: None,
        shrink_report: None,
        note: None,
    };
    match effective_fim_with(&model, &cfg.theta, &domain, cfg.probe_range) {
        Ok(e) => {
            report.regularized_eigenvalues = Some(eigenvalues(&e.regularized));
            report.trace_regularized = Some(e.trace_regularized);
            report.trace_corrected = Some(e.trace_corrected);
            report.regularized = Some(e.regularized);
            report.corrected = Some(e.corrected);
            report.corrected_center = Some(e.center);
            report.shrink_report = Some(e.report);
        }
        Err(e @ (Error::SingularKernel { .. } | Error::SingularFim { .. } | Error::IterationBudgetExceeded { .. })) => {
            report.note = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// Half-mass ellipse of a configured kernel.
pub fn ellipse(cfg: &EllipseConfig) -> Result<EllipseSpec> {
    let k = DMatrix::from_fn(2, 2, |i, j| cfg.kernel[i][j]);
    ellipse_from_quadratic_form(&k, cfg.center)
}

/// Write `ellipse.json` and `ellipse.svg`.
pub fn write_ellipse(e: &EllipseSpec, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join("ellipse.json");
    let svg = dir.join("ellipse.svg");
    write_json(&json, e)?;
    let mut p = Plot::new("Half-mass ellipse", "θ0", "θ1");
    p.equal_aspect = true;
    p.series.push(Series::new("ellipse", e.outline(180), Style::Line));
    p.series.push(Series::new("center", vec![(e.center[0], e.center[1])], Style::Markers));
    std::fs::write(&svg, p.to_svg())?;
    Ok(vec![json, svg])
}
