//! Summary statistics of estimate batches and the biased Cramér–Rao bound.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Bias, spread and error of a set of estimates around the true value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McStats {
    pub count: usize,
    pub mean: Vec<f64>,
    /// Sample covariance with divisor `count − 1`, row-major.
    pub covariance: Vec<Vec<f64>>,
    /// `mean − θ_true`.
    pub bias: Vec<f64>,
    /// Mean squared distance from the sample mean, `Σ_m Var(θ̂_m)` with
    /// divisor `count`; together with the bias this splits the MSE exactly.
    pub total_variance: f64,
    /// Mean of `|θ̂ − θ_true|²`.
    pub total_mse: f64,
}

impl McStats {
    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let n = self.mean.len();
        DMatrix::from_fn(n, n, |i, j| self.covariance[i][j])
    }

    pub fn rmse(&self) -> f64 {
        self.total_mse.sqrt()
    }
}

/// Summarize `estimates` against `theta_true`.
pub fn mc_stats(estimates: &[Vec<f64>], theta_true: &[f64]) -> Result<McStats> {
    let count = estimates.len();
    if count < 2 {
        return Err(Error::InsufficientSamples(count));
    }
    let n = theta_true.len();
    if let Some(bad) = estimates.iter().find(|e| e.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    let cf = count as f64;
    let column = |k: usize| -> Vec<f64> { estimates.iter().map(|e| e[k]).collect() };
    let mean: Vec<f64> = (0..n).map(|k| pairwise_sum(&column(k)) / cf).collect();
    let mut covariance = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let prods: Vec<f64> = estimates.iter().map(|e| (e[i] - mean[i]) * (e[j] - mean[j])).collect();
            let c = pairwise_sum(&prods) / (cf - 1.0);
            covariance[i][j] = c;
            covariance[j][i] = c;
        }
    }
    let bias: Vec<f64> = mean.iter().zip(theta_true).map(|(m, t)| m - t).collect();
    let spread: Vec<f64> = estimates
        .iter()
        .map(|e| e.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum())
        .collect();
    let total_variance = pairwise_sum(&spread) / cf;
    let bias2: f64 = bias.iter().map(|b| b * b).sum();
    Ok(McStats {
        count,
        mean,
        covariance,
        bias,
        total_variance,
        total_mse: total_variance + bias2,
    })
}

/// Error prediction of a biased estimator on a uniform grid:
/// `(1 + b′)²/F + b²` with `b′` from central differences (second-order
/// one-sided differences at the ends).
pub fn biased_crb_mse(fisher: &[f64], bias: &[f64], step: f64) -> Result<Vec<f64>> {
    let n = bias.len();
    if n < 3 {
        return Err(Error::GridTooCoarse(n));
    }
    if fisher.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: fisher.len(),
        });
    }
    let deriv = |i: usize| -> f64 {
        if i == 0 {
            (-3.0 * bias[0] + 4.0 * bias[1] - bias[2]) / (2.0 * step)
        } else if i == n - 1 {
            (3.0 * bias[n - 1] - 4.0 * bias[n - 2] + bias[n - 3]) / (2.0 * step)
        } else {
            (bias[i + 1] - bias[i - 1]) / (2.0 * step)
        }
    };
    Ok((0..n)
        .map(|i| {
            let g = 1.0 + deriv(i);
            let var = if g == 0.0 { 0.0 } else { g * g / fisher[i] };
            var + bias[i] * bias[i]
        })
        .collect())
}
