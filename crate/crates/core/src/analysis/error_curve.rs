//! `error-curve`: standard, regularized and corrected bounds of a
//! one-parameter model next to Monte Carlo errors of the MLE and the
//! posterior mean.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    bayes_dictionary, biased_crb_mse, draw_counts, exact_moments, mle_constrained, mle_dictionary, Dictionary,
};
use crate::models::{BoxDomain, Model, SignalModel};
use crate::regularizer::ProbeRange;

use super::config::ErrorCurveConfig;
use super::pipeline::effective_fim_with;
use super::svg::{Plot, Series, Style};
use super::{cell, write_csv, write_json};

pub const CSV_HEADER: [&str; 13] = [
    "A",
    "F",
    "F_reg",
    "F_corr",
    "Δ_std",
    "Δ_reg",
    "Δ_corr",
    "Δ_MLE_mc",
    "Δ_Bayes_mc",
    "bias_MLE",
    "bias_Bayes",
    "Δ_MLE_biasedCRB",
    "Δ_Bayes_biasedCRB",
];

/// Unbiased-regime tolerance on `|Δ_corr/Δ_MLE_mc − 1|`.
pub const REGION_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurveRow {
    pub a: f64,
    pub f: f64,
    pub f_reg: f64,
    pub f_corr: f64,
    /// `None` where `F = 0`.
    pub delta_std: Option<f64>,
    pub delta_reg: f64,
    pub delta_corr: f64,
    pub delta_mle_mc: f64,
    pub delta_bayes_mc: f64,
    pub bias_mle: f64,
    pub bias_bayes: f64,
    pub delta_mle_biased_crb: f64,
    pub delta_bayes_biased_crb: f64,
}

/// Embedded check of the unbiased regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCheck {
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub worst_a: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurveSummary {
    pub grid_step: f64,
    pub samples: usize,
    pub seed: u64,
    pub estimates_source: String,
    pub bias_source: String,
    pub region_ii: RegionCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub rows: Vec<ErrorCurveRow>,
    pub summary: ErrorCurveSummary,
}

fn inv_sqrt(f: f64) -> f64 {
    if f > 0.0 {
        1.0 / f.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Look up `Â(y)`, solving directly for counts past the dictionary.
fn lookup(dict: &Dictionary, y: u64, solve: impl Fn(u64) -> Result<f64>) -> Result<f64> {
    match dict.estimates.get(y as usize) {
        Some(v) => Ok(*v),
        None => solve(y),
    }
}

/// Root-mean-square errors of the two estimators over `samples` Poisson
/// draws at `a`.
fn mc_rmse(
    model: &Model,
    a: f64,
    mle: &Dictionary,
    bayes: &Dictionary,
    domain: &BoxDomain,
    seed: u64,
    samples: usize,
) -> Result<(f64, f64)> {
    let means = model.signal(&[a])?;
    let sq: Vec<(f64, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let y = draw_counts(&means, seed, s)[0];
            let m = lookup(mle, y, |y| Ok(mle_constrained(model, &[y as f64], domain)?[0]))?;
            let b = lookup(bayes, y, |y| Ok(crate::estimators::bayes_mean(model, &[y as f64], domain)?[0]))?;
            Ok(((m - a).powi(2), (b - a).powi(2)))
        })
        .collect::<Result<_>>()?;
    let n = samples as f64;
    let (m, b): (Vec<f64>, Vec<f64>) = sq.into_iter().unzip();
    Ok((
        (crate::estimators::pairwise_sum(&m) / n).sqrt(),
        (crate::estimators::pairwise_sum(&b) / n).sqrt(),
    ))
}

/// Compute the full table.
pub fn compute(cfg: &ErrorCurveConfig) -> Result<ErrorCurve> {
    cfg.validate()?;
    let model = Model::new(cfg.model.clone())?;
    let (lo, hi) = (0.0, 1.0);
    let domain = BoxDomain::new(vec![lo], vec![hi])?;
    let grid = cfg.grid.values();
    if grid.iter().any(|a| !(lo..=hi).contains(a)) {
        return Err(Error::Config("the A grid must lie in [0, 1]".into()));
    }
    let mle = mle_dictionary(&model, lo, hi)?;
    let bayes = bayes_dictionary(&model, lo, hi)?;

    struct Point {
        f: f64,
        f_reg: f64,
        f_corr: f64,
        mle_mc: f64,
        bayes_mc: f64,
        bias_mle: f64,
        bias_bayes: f64,
    }
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let e = effective_fim_with(&model, &[a], &domain, ProbeRange::Domain)?;
            let (mle_mc, bayes_mc) = mc_rmse(&model, a, &mle, &bayes, &domain, cfg.seed.wrapping_add(i as u64), cfg.samples)?;
            Ok(Point {
                f: e.standard.matrix[(0, 0)],
                f_reg: e.regularized.matrix[(0, 0)],
                f_corr: e.corrected.matrix[(0, 0)],
                mle_mc,
                bayes_mc,
                bias_mle: exact_moments(&model, a, &mle)?.bias,
                bias_bayes: exact_moments(&model, a, &bayes)?.bias,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let fs: Vec<f64> = points.iter().map(|p| p.f).collect();
    let step = cfg.grid.step();
    let mle_pred = biased_crb_mse(&fs, &points.iter().map(|p| p.bias_mle).collect::<Vec<_>>(), step)?;
    let bayes_pred = biased_crb_mse(&fs, &points.iter().map(|p| p.bias_bayes).collect::<Vec<_>>(), step)?;

    let rows: Vec<ErrorCurveRow> = grid
        .iter()
        .zip(&points)
        .enumerate()
        .map(|(i, (&a, p))| ErrorCurveRow {
            a,
            f: p.f,
            f_reg: p.f_reg,
            f_corr: p.f_corr,
            delta_std: (p.f > 0.0).then(|| inv_sqrt(p.f)),
            delta_reg: inv_sqrt(p.f_reg),
            delta_corr: inv_sqrt(p.f_corr),
            delta_mle_mc: p.mle_mc,
            delta_bayes_mc: p.bayes_mc,
            bias_mle: p.bias_mle,
            bias_bayes: p.bias_bayes,
            delta_mle_biased_crb: mle_pred[i].sqrt(),
            delta_bayes_biased_crb: bayes_pred[i].sqrt(),
        })
        .collect();

    let region_ii = region_check(&rows, cfg.region);
    Ok(ErrorCurve {
        summary: ErrorCurveSummary {
            grid_step: step,
            samples: cfg.samples,
            seed: cfg.seed,
            estimates_source: "Monte Carlo, one Poisson draw per sample, estimators tabulated per count".into(),
            bias_source: "exact sum over Poisson outcomes".into(),
            region_ii,
        },
        rows,
    })
}

/// `max |Δ_corr/Δ_MLE_mc − 1|` over grid points in `[range[0], range[1]]`.
pub fn region_check(rows: &[ErrorCurveRow], range: [f64; 2]) -> RegionCheck {
    let (mut worst, mut worst_a) = (0.0_f64, f64::NAN);
    for r in rows.iter().filter(|r| r.a >= range[0] - 1e-12 && r.a <= range[1] + 1e-12) {
        let dev = (r.delta_corr / r.delta_mle_mc - 1.0).abs();
        if !(dev <= worst) {
            worst = dev;
            worst_a = r.a;
        }
    }
    RegionCheck {
        lower: range[0],
        upper: range[1],
        tolerance: REGION_TOLERANCE,
        max_deviation: worst,
        worst_a,
        pass: worst < REGION_TOLERANCE,
    }
}

impl ErrorCurve {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.a.to_string(),
                    r.f.to_string(),
                    r.f_reg.to_string(),
                    r.f_corr.to_string(),
                    cell(r.delta_std),
                    cell(Some(r.delta_reg)),
                    cell(Some(r.delta_corr)),
                    cell(Some(r.delta_mle_mc)),
                    cell(Some(r.delta_bayes_mc)),
                    r.bias_mle.to_string(),
                    r.bias_bayes.to_string(),
                    cell(Some(r.delta_mle_biased_crb)),
                    cell(Some(r.delta_bayes_biased_crb)),
                ]
            })
            .collect()
    }

    pub fn plot(&self) -> Plot {
        let col = |f: &dyn Fn(&ErrorCurveRow) -> f64| self.rows.iter().map(|r| (r.a, f(r))).collect::<Vec<_>>();
        let mut p = Plot::new("Estimation error", "A", "Δ");
        p.log_y = true;
        p.series = vec![
            Series::new("standard", col(&|r| r.delta_std.unwrap_or(f64::INFINITY)), Style::Line),
            Series::new("regularized", col(&|r| r.delta_reg), Style::Dotted),
            Series::new("corrected", col(&|r| r.delta_corr), Style::Line),
            Series::new("MLE (MC)", col(&|r| r.delta_mle_mc), Style::Markers),
            Series::new("Bayes (MC)", col(&|r| r.delta_bayes_mc), Style::Markers),
            Series::new("MLE biased CRB", col(&|r| r.delta_mle_biased_crb), Style::Dashed),
            Series::new("Bayes biased CRB", col(&|r| r.delta_bayes_biased_crb), Style::Dashed),
        ];
        p.notes.push(format!("grid step {}", self.summary.grid_step));
        p
    }

    pub fn bias_plot(&self) -> Plot {
        let mut p = Plot::new("Estimation bias", "A", "bias");
        p.series = vec![
            Series::new("MLE", self.rows.iter().map(|r| (r.a, r.bias_mle)).collect(), Style::Line),
            Series::new("Bayes", self.rows.iter().map(|r| (r.a, r.bias_bayes)).collect(), Style::Dashed),
        ];
        p.hlines.push((0.0, String::new()));
        p
    }

    /// Write `error_curve.csv`, `error_curve.json`, `error_curve.svg` and
    /// `error_curve_bias.svg`; returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let files = [
            dir.join("error_curve.csv"),
            dir.join("error_curve.json"),
            dir.join("error_curve.svg"),
            dir.join("error_curve_bias.svg"),
        ];
        write_csv(&files[0], &CSV_HEADER, &self.csv_rows())?;
        write_json(&files[1], &self.summary)?;
        std::fs::write(&files[2], self.plot().to_svg())?;
        std::fs::write(&files[3], self.bias_plot().to_svg())?;
        Ok(files.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::config::UniformGrid;

    fn small() -> ErrorCurveConfig {
        ErrorCurveConfig {
            grid: UniformGrid {
                start: 0.0,
                stop: 1.0,
                points: 11,
            },
            samples: 2000,
            ..ErrorCurveConfig::default()
        }
    }

    #[test]
    fn zero_amplitude_row_has_sentinel_and_finite_regularized_error() {
        let c = compute(&small()).unwrap();
        let r0 = &c.rows[0];
        assert_eq!(r0.delta_std, None);
        assert_eq!(c.csv_rows()[0][4], "inf");
        assert!((r0.delta_reg - 0.318).abs() < 1e-3, "{}", r0.delta_reg);
        assert!(r0.delta_corr.is_finite());
        // S(0) = 0 pins both estimators
        assert_eq!(r0.delta_mle_mc, 0.0);
        // clipping at the upper bound pulls the MLE down
        assert!(c.rows[10].bias_mle < 0.0);
        for r in &c.rows[1..] {
            assert!((r.f - 1568.0 * r.a * r.a).abs() < 1e-9 * r.f);
            if let Some(s) = r.delta_std {
                assert!(r.delta_corr <= s * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn output_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ErrorCurveConfig {
            samples: 300,
            ..small()
        };
        compute(&cfg).unwrap().write(dir.path()).unwrap();
        let first = std::fs::read(dir.path().join("error_curve.csv")).unwrap();
        compute(&cfg).unwrap().write(dir.path()).unwrap();
        assert_eq!(first, std::fs::read(dir.path().join("error_curve.csv")).unwrap());
        let text = String::from_utf8(first).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(text.lines().count(), 12);
    }
}
