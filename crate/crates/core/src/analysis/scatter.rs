//! `scatter-2d`: sampled MLE and posterior-mean estimates of a
//! two-parameter model with their half-mass ellipses and the ellipses
//! predicted by the standard and the corrected information.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{mc_stats, run_mc, Estimator, McRun, McStats, OptimizerOptions};
use crate::models::{BoxDomain, Model};
use crate::regularizer::ProbeRange;

use super::config::{Scatter2dConfig, ScatterCase};
use super::ellipse::{covariance_ellipse, ellipse_from_quadratic_form, EllipseSpec};
use super::pipeline::effective_fim_with;
use super::svg::{Plot, Series, Style};
use super::{write_csv, write_json};

const OUTLINE_POINTS: usize = 120;

/// Numbers and ellipses of one true point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSummary {
    pub theta: [f64; 2],
    #[serde(rename = "N")]
    pub n_mean: f64,
    pub seed: u64,
    /// `Tr F⁻¹`, `None` when singular.
    pub trace_standard: Option<f64>,
    pub trace_regularized: f64,
    pub trace_corrected: f64,
    /// `‖F̃ − F‖_max / ‖F‖_max`.
    pub correction_change: f64,
    pub shrink_iterations: usize,
    pub mle: McStats,
    pub bayes: McStats,
    pub ellipse_standard: Option<EllipseSpec>,
    pub ellipse_corrected: EllipseSpec,
    pub ellipse_mle: Option<EllipseSpec>,
    pub ellipse_bayes: Option<EllipseSpec>,
}

impl ScatterSummary {
    pub fn mle_covariance_trace(&self) -> f64 {
        self.mle.covariance[0][0] + self.mle.covariance[1][1]
    }

    pub fn bayes_covariance_trace(&self) -> f64 {
        self.bayes.covariance[0][0] + self.bayes.covariance[1][1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterResult {
    pub summary: ScatterSummary,
    pub mle: McRun,
    pub bayes: McRun,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scatter2d {
    pub cases: Vec<ScatterResult>,
}

fn max_abs(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn optional_ellipse(r: Result<EllipseSpec>) -> Result<Option<EllipseSpec>> {
    match r {
        Ok(e) => Ok(Some(e)),
        Err(Error::SingularKernel { .. }) | Err(Error::SingularFim { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Run one case.
pub fn compute_case(cfg: &Scatter2dConfig, case: &ScatterCase, seed: u64) -> Result<ScatterResult> {
    let model = Model::new(cfg.model.with_counts(case.n_mean))?;
    let domain = BoxDomain::unit(2);
    let theta = case.theta.to_vec();
    let e = effective_fim_with(&model, &theta, &domain, ProbeRange::Domain)?;
    let opts = OptimizerOptions {
        seed,
        ..OptimizerOptions::default()
    };
    let mle = run_mc(&model, &theta, Estimator::Mle, &domain, seed, cfg.samples, &opts)?;
    let bayes = run_mc(&model, &theta, Estimator::Bayes, &domain, seed, cfg.samples, &opts)?;
    let mle_stats = mc_stats(&mle.estimates, &theta)?;
    let bayes_stats = mc_stats(&bayes.estimates, &theta)?;
    let sample_ellipse = |s: &McStats| optional_ellipse(covariance_ellipse(&s.covariance_matrix(), [s.mean[0], s.mean[1]]));
    let summary = ScatterSummary {
        theta: case.theta,
        n_mean: case.n_mean,
        seed,
        trace_standard: e.trace_standard,
        trace_regularized: e.trace_regularized,
        trace_corrected: e.trace_corrected,
        correction_change: max_abs(&(&e.corrected.matrix - &e.standard.matrix)) / max_abs(&e.standard.matrix),
        shrink_iterations: e.report.iterations,
        ellipse_standard: optional_ellipse(ellipse_from_quadratic_form(&e.standard.matrix, case.theta))?,
        ellipse_corrected: ellipse_from_quadratic_form(&e.corrected.matrix, [e.center[0], e.center[1]])?,
        ellipse_mle: sample_ellipse(&mle_stats)?,
        ellipse_bayes: sample_ellipse(&bayes_stats)?,
        mle: mle_stats,
        bayes: bayes_stats,
    };
    Ok(ScatterResult { summary, mle, bayes })
}

/// Run every configured case; case `k` uses seed `seed + k`.
pub fn compute(cfg: &Scatter2dConfig) -> Result<Scatter2d> {
    cfg.validate()?;
    let cases = cfg
        .cases
        .iter()
        .enumerate()
        .map(|(k, c)| compute_case(cfg, c, cfg.seed.wrapping_add(k as u64)))
        .collect::<Result<_>>()?;
    Ok(Scatter2d { cases })
}

impl ScatterResult {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.mle
            .estimates
            .iter()
            .zip(&self.bayes.estimates)
            .enumerate()
            .map(|(s, (m, b))| vec![s.to_string(), m[0].to_string(), m[1].to_string(), b[0].to_string(), b[1].to_string()])
            .collect()
    }

    pub fn plot(&self) -> Plot {
        let s = &self.summary;
        let mut p = Plot::new(
            format!("A = ({}, {}), N = {}", s.theta[0], s.theta[1], s.n_mean),
            "A1",
            "A2",
        );
        p.equal_aspect = true;
        let pts = |run: &McRun| run.estimates.iter().map(|e| (e[0], e[1])).collect();
        p.series.push(Series::new("MLE", pts(&self.mle), Style::Markers));
        p.series.push(Series::new("Bayes", pts(&self.bayes), Style::Markers));
        if let Some(e) = &s.ellipse_mle {
            p.series.push(Series::new("MLE half-mass", e.outline(OUTLINE_POINTS), Style::Dotted));
        }
        if let Some(e) = &s.ellipse_bayes {
            p.series.push(Series::new("Bayes half-mass", e.outline(OUTLINE_POINTS), Style::Dotted));
        }
        if let Some(e) = &s.ellipse_standard {
            p.series.push(Series::new("standard F", e.outline(OUTLINE_POINTS), Style::Dashed));
        }
        p.series.push(Series::new("corrected F", s.ellipse_corrected.outline(OUTLINE_POINTS), Style::Line));
        p.series.push(Series::new(
            "domain",
            vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)],
            Style::Line,
        ));
        p
    }
}

impl Scatter2d {
    /// Write `scatter_2d.json` plus a sample CSV and an SVG per case.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        for (k, c) in self.cases.iter().enumerate() {
            let csv = dir.join(format!("scatter_2d_case{k}.csv"));
            write_csv(&csv, &["sample", "MLE_A1", "MLE_A2", "Bayes_A1", "Bayes_A2"], &c.csv_rows())?;
            let svg = dir.join(format!("scatter_2d_case{k}.svg"));
            std::fs::write(&svg, c.plot().to_svg())?;
            files.extend([csv, svg]);
        }
        let json = dir.join("scatter_2d.json");
        let summaries: Vec<&ScatterSummary> = self.cases.iter().map(|c| &c.summary).collect();
        write_json(&json, &summaries)?;
        files.push(json);
        Ok(files)
    }
}
