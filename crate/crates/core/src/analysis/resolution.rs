//! `resolution-scan`: total variance of the standard and the corrected
//! bounds against the pixel width, with least-squares Monte Carlo errors and
//! the smallest resolvable width under a threshold.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{mc_stats, run_mc, Estimator, OptimizerOptions};
use crate::fisher::{fim_poisson, FisherMatrix};
use crate::linalg::spd_inverse;
use crate::models::{BoxDomain, Model, SignalModel, SignalVector};

use super::config::{Annotation, ScanConfig, WindowConfig};
use super::pipeline::{effective_fim_with, trace_or_singular};
use super::svg::{Plot, Series, Style};
use super::{cell, write_csv, write_json};

pub const CSV_HEADER: [&str; 5] = ["d/d_R", "Δ²_std", "Δ²_corr", "Δ²_Var_mc", "Δ²_MSE_mc"];

/// One grid point. `None` marks a singular or failed bound, NaN a skipped
/// simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub d_over_dr: f64,
    pub delta2_std: Option<f64>,
    pub delta2_corr: Option<f64>,
    pub delta2_var_mc: f64,
    pub delta2_mse_mc: f64,
    /// Smallest over largest eigenvalue of the standard FIM.
    pub condition_inverse: f64,
    /// Why a bound is missing, if it is.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Smallest grid value per curve with `Δ² ≤ threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub standard: Option<f64>,
    pub corrected: Option<f64>,
    pub mc_variance: Option<f64>,
    pub mc_mse: Option<f64>,
}

/// Growth of the bounds over the largest-width quartile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDCheck {
    /// First grid value of the quartile.
    pub from: f64,
    pub standard_nondecreasing: bool,
    /// `Δ²(last)/Δ²(first)` over the quartile.
    pub standard_growth: Option<f64>,
    pub corrected_growth: Option<f64>,
    pub corrected_grows_less: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub estimator: String,
    pub starts: usize,
    pub probes: usize,
    pub max_iterations: usize,
    pub gradient_tol: f64,
    pub armijo: f64,
    pub variance_box: String,
    pub mse_box: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub threshold: f64,
    pub grid: Vec<f64>,
    /// Smallest spacing of the grid; `d_min` is not interpolated.
    pub grid_spacing: f64,
    #[serde(rename = "N")]
    pub n_mean: f64,
    pub samples: usize,
    pub seed: u64,
    pub probe_range: crate::regularizer::ProbeRange,
    /// Window layout when the scan was windowed.
    pub windows: Option<Vec<[usize; 2]>>,
    pub d_min: Resolution,
    pub region_d: RegionDCheck,
    /// Grid points where `Δ²_corr > Δ²_std`.
    pub corrected_above_standard: Vec<f64>,
    pub optimizer: OptimizerSettings,
    pub annotations: Vec<Annotation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionScan {
    pub rows: Vec<ScanRow>,
    pub summary: ScanSummary,
}

/// The model restricted to a subset of its parameters, the others held at
/// fixed values.
pub struct Restricted<'a, M: SignalModel + ?Sized> {
    pub model: &'a M,
    pub base: Vec<f64>,
    pub indices: Vec<usize>,
}

impl<M: SignalModel + ?Sized> Restricted<'_, M> {
    fn full(&self, theta: &[f64]) -> Vec<f64> {
        let mut t = self.base.clone();
        for (k, &i) in self.indices.iter().enumerate() {
            t[i] = theta[k];
        }
        t
    }
}

impl<M: SignalModel + ?Sized> SignalModel for Restricted<'_, M> {
    fn param_dim(&self) -> usize {
        self.indices.len()
    }

    fn signal_dim(&self) -> usize {
        self.model.signal_dim()
    }

    fn signal(&self, theta: &[f64]) -> Result<SignalVector> {
        self.check_theta(theta)?;
        self.model.signal(&self.full(theta))
    }

    fn jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_theta(theta)?;
        Ok(self.model.jacobian(&self.full(theta))?.select_columns(&self.indices))
    }

    fn signal_and_derivative(&self, theta: &[f64], v: &[f64]) -> Result<(SignalVector, Vec<f64>)> {
        self.check_theta(theta)?;
        let mut full = vec![0.0; self.base.len()];
        for (k, &i) in self.indices.iter().enumerate() {
            full[i] = v[k];
        }
        self.model.signal_and_derivative(&self.full(theta), &full)
    }
}

/// Overlapping windows `[start, end)` covering `0..n`.
pub fn window_layout(n: usize, w: &WindowConfig) -> Vec<[usize; 2]> {
    if n <= w.size {
        return vec![[0, n]];
    }
    let step = w.size - w.overlap;
    let mut out = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + w.size).min(n);
        out.push([end - w.size, end]);
        if end == n {
            break;
        }
        start += step;
    }
    out
}

/// Window owning each parameter: the one whose centre is nearest.
fn owners(n: usize, windows: &[[usize; 2]]) -> Vec<usize> {
    (0..n)
        .map(|j| {
            let x = j as f64 + 0.5;
            (0..windows.len())
                .min_by(|&a, &b| {
                    let ca = 0.5 * (windows[a][0] + windows[a][1]) as f64;
                    let cb = 0.5 * (windows[b][0] + windows[b][1]) as f64;
                    (x - ca).abs().total_cmp(&(x - cb).abs())
                })
                .expect("at least one window")
        })
        .collect()
}

fn is_sentinel(e: &Error) -> bool {
    matches!(
        e,
        Error::SingularFim { .. }
            | Error::SingularKernel { .. }
            | Error::IterationBudgetExceeded { .. }
            | Error::SingularTerm { .. }
    )
}

/// Corrected covariance of every parameter from per-window effective
/// information, assembled block-diagonally over the owned parameters.
/// Returns `(Tr F⁻¹ or None, Tr F̃⁻¹)`.
fn windowed_traces(
    model: &Model,
    theta: &[f64],
    windows: &[[usize; 2]],
    range: crate::regularizer::ProbeRange,
) -> Result<(Option<f64>, f64)> {
    let own = owners(theta.len(), windows);
    let (mut std_total, mut corr_total) = (Some(0.0), 0.0);
    for (w, win) in windows.iter().enumerate() {
        let indices: Vec<usize> = (win[0]..win[1]).collect();
        let sub = Restricted {
            model,
            base: theta.to_vec(),
            indices: indices.clone(),
        };
        let local: Vec<f64> = indices.iter().map(|&i| theta[i]).collect();
        let e = effective_fim_with(&sub, &local, &BoxDomain::unit(local.len()), range)?;
        let corr_cov = spd_inverse(&e.corrected.matrix)?;
        let std_cov = spd_inverse(&e.standard.matrix).ok().filter(|_| e.trace_standard.is_some());
        for (k, &i) in indices.iter().enumerate() {
            if own[i] == w {
                corr_total += corr_cov[(k, k)];
                std_total = match (std_total, &std_cov) {
                    (Some(t), Some(c)) => Some(t + c[(k, k)]),
                    _ => None,
                };
            }
        }
    }
    Ok((std_total, corr_total))
}

fn condition_inverse(f: &FisherMatrix) -> f64 {
    let e = crate::linalg::sym_eigen(&f.matrix);
    if e.max() > 0.0 {
        e.min() / e.max()
    } else {
        0.0
    }
}

fn optimizer(seed: u64) -> OptimizerOptions {
    OptimizerOptions {
        seed,
        ..OptimizerOptions::default()
    }
}

fn scan_point(cfg: &ScanConfig, index: usize, g: f64, windows: Option<&[[usize; 2]]>) -> Result<ScanRow> {
    let model = Model::new(cfg.model_at(g))?;
    let theta = &cfg.object;
    let n = theta.len();
    let domain = BoxDomain::unit(n);
    let standard = fim_poisson(&model, theta)?;
    let mut note = None;
    let bounds = match windows {
        Some(w) => windowed_traces(&model, theta, w, cfg.probe_range),
        None => effective_fim_with(&model, theta, &domain, cfg.probe_range).map(|e| (e.trace_standard, e.trace_corrected)),
    };
    let (delta2_std, delta2_corr) = match bounds {
        Ok((s, c)) => (s, Some(c)),
        Err(e) if is_sentinel(&e) => {
            note = Some(e.to_string());
            (trace_or_singular(&standard)?, None)
        }
        Err(e) => return Err(e),
    };
    let (delta2_var_mc, delta2_mse_mc) = if cfg.samples == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let seed = cfg.seed.wrapping_add(index as u64);
        let open = BoxDomain::new(vec![0.0; n], vec![f64::INFINITY; n])?;
        let free = run_mc(&model, theta, Estimator::LeastSquares, &open, seed, cfg.samples, &optimizer(seed))?;
        let boxed = run_mc(&model, theta, Estimator::LeastSquares, &domain, seed, cfg.samples, &optimizer(seed))?;
        (
            mc_stats(&free.estimates, theta)?.total_variance,
            mc_stats(&boxed.estimates, theta)?.total_mse,
        )
    };
    Ok(ScanRow {
        d_over_dr: g,
        delta2_std,
        delta2_corr,
        delta2_var_mc,
        delta2_mse_mc,
        condition_inverse: condition_inverse(&standard),
        note,
    })
}

/// Smallest grid value whose entry is at most `threshold`.
pub fn d_min(grid: &[f64], values: &[Option<f64>], threshold: f64) -> Option<f64> {
    grid.iter()
        .zip(values)
        .find(|(_, v)| v.is_some_and(|v| v <= threshold))
        .map(|(g, _)| *g)
}

/// Monotonicity of `Δ²_std` and relative growth of both bounds over the
/// largest-width quartile (at least two points).
pub fn region_d_check(rows: &[ScanRow]) -> RegionDCheck {
    let q = rows.len().div_ceil(4).max(2).min(rows.len());
    let tail = &rows[rows.len() - q..];
    let growth = |f: &dyn Fn(&ScanRow) -> Option<f64>| match (f(&tail[0]), f(&tail[q - 1])) {
        (Some(a), Some(b)) if a > 0.0 => Some(b / a),
        _ => None,
    };
    let standard_nondecreasing = tail.windows(2).all(|w| match (w[0].delta2_std, w[1].delta2_std) {
        (Some(a), Some(b)) => b >= a,
        (Some(_), None) => true,
        _ => false,
    });
    let standard_growth = growth(&|r| r.delta2_std);
    let corrected_growth = growth(&|r| r.delta2_corr);
    let corrected_grows_less = match (standard_growth, corrected_growth) {
        (Some(s), Some(c)) => c < s,
        (None, Some(_)) => true,
        _ => false,
    };
    RegionDCheck {
        from: tail[0].d_over_dr,
        standard_nondecreasing,
        standard_growth,
        corrected_growth,
        corrected_grows_less,
    }
}

/// Run the scan; `windowed` splits the parameters into the configured
/// windows.
pub fn compute(cfg: &ScanConfig, windowed: bool) -> Result<ResolutionScan> {
    cfg.validate()?;
    let windows = windowed.then(|| window_layout(cfg.object.len(), &cfg.window));
    let rows = cfg
        .grid
        .par_iter()
        .enumerate()
        .map(|(i, &g)| scan_point(cfg, i, g, windows.as_deref()))
        .collect::<Result<Vec<_>>>()?;
    let col = |f: &dyn Fn(&ScanRow) -> Option<f64>| rows.iter().map(f).collect::<Vec<_>>();
    let finite = |v: f64| (!v.is_nan()).then_some(v);
    let d_min = Resolution {
        standard: d_min(&cfg.grid, &col(&|r| r.delta2_std), cfg.threshold),
        corrected: d_min(&cfg.grid, &col(&|r| r.delta2_corr), cfg.threshold),
        mc_variance: d_min(&cfg.grid, &col(&|r| finite(r.delta2_var_mc)), cfg.threshold),
        mc_mse: d_min(&cfg.grid, &col(&|r| finite(r.delta2_mse_mc)), cfg.threshold),
    };
    let corrected_above_standard = rows
        .iter()
        .filter(|r| matches!((r.delta2_std, r.delta2_corr), (Some(s), Some(c)) if c > s))
        .map(|r| r.d_over_dr)
        .collect();
    let defaults = OptimizerOptions::default();
    let summary = ScanSummary {
        threshold: cfg.threshold,
        grid: cfg.grid.clone(),
        grid_spacing: cfg.grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min),
        n_mean: match cfg.base_model() {
            crate::models::ModelSpec::SlitArray(s) => s.n_mean,
            crate::models::ModelSpec::BiphotonG2(s) => s.n_mean,
            _ => f64::NAN,
        },
        samples: cfg.samples,
        seed: cfg.seed,
        probe_range: cfg.probe_range,
        windows,
        d_min,
        region_d: region_d_check(&rows),
        corrected_above_standard,
        optimizer: OptimizerSettings {
            estimator: "least squares, Gauss-Newton with projected Armijo search".into(),
            starts: defaults.starts,
            probes: defaults.probes,
            max_iterations: defaults.max_iterations,
            gradient_tol: defaults.gradient_tol,
            armijo: defaults.armijo,
            variance_box: "[0, inf) per amplitude".into(),
            mse_box: "[0, 1] per amplitude".into(),
        },
        annotations: cfg.annotations.clone(),
    };
    Ok(ResolutionScan { rows, summary })
}

impl ResolutionScan {
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.d_over_dr.to_string(),
                    cell(r.delta2_std),
                    cell(r.delta2_corr),
                    cell(Some(r.delta2_var_mc)),
                    cell(Some(r.delta2_mse_mc)),
                ]
            })
            .collect()
    }

    pub fn plot(&self) -> Plot {
        let pts = |f: &dyn Fn(&ScanRow) -> f64| self.rows.iter().map(|r| (r.d_over_dr, f(r))).collect::<Vec<_>>();
        let mut p = Plot::new("Total variance", "d/d_R", "Δ²");
        p.log_y = true;
        p.series = vec![
            Series::new("standard", pts(&|r| r.delta2_std.unwrap_or(f64::INFINITY)), Style::Dashed),
            Series::new("corrected", pts(&|r| r.delta2_corr.unwrap_or(f64::INFINITY)), Style::Line),
        ];
        if self.summary.samples > 0 {
            p.series.push(Series::new("LS variance (MC)", pts(&|r| r.delta2_var_mc), Style::Markers));
            p.series.push(Series::new("constrained LS MSE (MC)", pts(&|r| r.delta2_mse_mc), Style::Markers));
        }
        p.hlines.push((self.summary.threshold, "threshold".into()));
        for a in &self.summary.annotations {
            p.vlines.push((a.d_over_dr, a.label.clone()));
        }
        let d = &self.summary.d_min;
        p.notes.push(format!(
            "d_min standard {}, corrected {}; grid spacing {}",
            cell(d.standard),
            cell(d.corrected),
            self.summary.grid_spacing
        ));
        p
    }

    /// Write `resolution_scan.csv`, `.json` and `.svg`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let files = [
            dir.join("resolution_scan.csv"),
            dir.join("resolution_scan.json"),
            dir.join("resolution_scan.svg"),
        ];
        write_csv(&files[0], &CSV_HEADER, &self.csv_rows())?;
        #[derive(Serialize)]
        struct Out<'a> {
            summary: &'a ScanSummary,
            rows: &'a [ScanRow],
        }
        write_json(
            &files[1],
            &Out {
                summary: &self.summary,
                rows: &self.rows,
            },
        )?;
        std::fs::write(&files[2], self.plot().to_svg())?;
        Ok(files.to_vec())
    }
}
