//! Exact estimator moments of one-parameter models by summing over all
//! Poisson outcomes.
//!
//! A one-parameter estimator is a dictionary `y ↦ Â(y)` over the integer
//! counts. Its bias and mean squared error at `A` follow from the Poisson
//! weights `p(y|S(A))`, and its error averaged over the whole parameter range
//! is the quadratic `Σ_y c₀(y)Â(y)² − 2c₁(y)Â(y) + c₂(y)` with
//! `c_k(y) = ∫ A^k p(y|S(A)) dA`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{BoxDomain, SignalModel};
use crate::quadrature::{adaptive_simpson_vec, SimpsonOptions};
use crate::special::ln_gamma;

use super::fit::mle_constrained;

/// Poisson probability of `y` counts at mean `mean`.
pub fn poisson_pmf(y: u64, mean: f64) -> f64 {
    if mean <= 0.0 {
        return if y == 0 { 1.0 } else { 0.0 };
    }
    let y = y as f64;
    (y * mean.ln() - mean - ln_gamma(y + 1.0)).exp()
}

/// Count cut-off that leaves negligible Poisson mass for means up to
/// `max_mean`.
pub fn outcome_cutoff(max_mean: f64) -> u64 {
    (max_mean + 15.0 * max_mean.sqrt() + 40.0).ceil() as u64
}

fn scalar_model<M: SignalModel + ?Sized>(model: &M) -> Result<()> {
    if model.param_dim() != 1 || model.signal_dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: model.param_dim().max(model.signal_dim()),
        });
    }
    Ok(())
}

fn mean_at<M: SignalModel + ?Sized>(model: &M, a: f64) -> Result<f64> {
    Ok(model.signal(&[a])?[0])
}

/// Estimates `Â(y)` for `y = 0, 1, …, len − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dictionary {
    pub estimates: Vec<f64>,
}

impl Dictionary {
    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }
}

/// Largest signal over the interval, from its endpoints and midpoint.
fn max_signal<M: SignalModel + ?Sized>(model: &M, lower: f64, upper: f64) -> Result<f64> {
    let mut m = 0.0_f64;
    for a in [lower, 0.5 * (lower + upper), upper] {
        m = m.max(mean_at(model, a)?);
    }
    Ok(m)
}

/// Maximum-likelihood dictionary over `[lower, upper]`.
pub fn mle_dictionary<M: SignalModel + ?Sized>(model: &M, lower: f64, upper: f64) -> Result<Dictionary> {
    scalar_model(model)?;
    let domain = BoxDomain::new(vec![lower], vec![upper])?;
    let y_max = outcome_cutoff(max_signal(model, lower, upper)?);
    let estimates = (0..=y_max)
        .map(|y| mle_constrained(model, &[y as f64], &domain).map(|v| v[0]))
        .collect::<Result<_>>()?;
    Ok(Dictionary { estimates })
}

/// Per-outcome integrals `c_k(y) = ∫ A^k p(y|S(A)) dA`, `k = 0, 1, 2`.
pub fn outcome_integrals<M: SignalModel + ?Sized>(model: &M, lower: f64, upper: f64) -> Result<Vec<[f64; 3]>> {
    scalar_model(model)?;
    let y_max = outcome_cutoff(max_signal(model, lower, upper)?);
    let opts = SimpsonOptions::with_rel_tol(1e-10);
    (0..=y_max)
        .map(|y| {
            adaptive_simpson_vec(
                |a| {
                    let p = model.signal(&[a]).map(|s| poisson_pmf(y, s[0])).unwrap_or(f64::NAN);
                    [p, a * p, a * a * p]
                },
                lower,
                upper,
                &opts,
            )
        })
        .collect()
}

/// Flat-prior posterior-mean dictionary, `c₁(y)/c₀(y)`.
pub fn bayes_dictionary<M: SignalModel + ?Sized>(model: &M, lower: f64, upper: f64) -> Result<Dictionary> {
    let c = outcome_integrals(model, lower, upper)?;
    let estimates = c
        .iter()
        .map(|c| if c[0] > 0.0 { (c[1] / c[0]).clamp(lower, upper) } else { 0.5 * (lower + upper) })
        .collect();
    Ok(Dictionary { estimates })
}

/// Exact moments of a dictionary estimator at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactMoments {
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
}

/// Mean, bias, variance and MSE of `dict` at parameter `a`.
pub fn exact_moments<M: SignalModel + ?Sized>(model: &M, a: f64, dict: &Dictionary) -> Result<ExactMoments> {
    scalar_model(model)?;
    let s = mean_at(model, a)?;
    let mut mass = 0.0;
    let (mut m1, mut m2) = (0.0, 0.0);
    for (y, est) in dict.estimates.iter().enumerate() {
        let p = poisson_pmf(y as u64, s);
        mass += p;
        m1 += p * est;
        m2 += p * (est - a) * (est - a);
    }
    if 1.0 - mass > 1e-12 {
        return Err(Error::TruncationBudgetExceeded { mean: s });
    }
    let bias = m1 - a;
    Ok(ExactMoments {
        mean: m1,
        bias,
        variance: m2 - bias * bias,
        mse: m2,
    })
}

/// `⟨Δ²⟩_A`: the MSE of `dict` averaged uniformly over `[lower, upper]`.
pub fn averaged_mse(integrals: &[[f64; 3]], dict: &Dictionary, lower: f64, upper: f64) -> f64 {
    let total: f64 = integrals
        .iter()
        .zip(&dict.estimates)
        .map(|(c, e)| c[0] * e * e - 2.0 * c[1] * e + c[2])
        .sum();
    total / (upper - lower)
}

/// Outcome of [`optimal_bias_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalBiasReport {
    /// Averaged MSE of the posterior-mean dictionary.
    pub bayes: f64,
    /// Averaged MSE of the maximum-likelihood dictionary.
    pub mle: f64,
    /// Averaged MSE of randomly jittered copies of the posterior-mean
    /// dictionary.
    pub perturbed: Vec<f64>,
    /// `(y, averaged MSE)` after moving only entry `y`.
    pub single_entry: Vec<(u64, f64)>,
    /// Whether the posterior mean beats every alternative.
    pub bayes_is_minimum: bool,
}

/// Compare the range-averaged MSE of the posterior mean with the MLE and
/// with `perturbations` jittered dictionaries (entries moved uniformly within
/// `±amplitude`).
pub fn optimal_bias_check<M: SignalModel + ?Sized>(
    model: &M,
    lower: f64,
    upper: f64,
    perturbations: usize,
    amplitude: f64,
    seed: u64,
) -> Result<OptimalBiasReport> {
    let c = outcome_integrals(model, lower, upper)?;
    let bayes_dict = Dictionary {
        estimates: c.iter().map(|c| if c[0] > 0.0 { c[1] / c[0] } else { 0.5 * (lower + upper) }).collect(),
    };
    let mle_dict = mle_dictionary(model, lower, upper)?;
    let bayes = averaged_mse(&c, &bayes_dict, lower, upper);
    let mle = averaged_mse(&c, &mle_dict, lower, upper);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perturbed: Vec<f64> = (0..perturbations)
        .map(|_| {
            let d = Dictionary {
                estimates: bayes_dict
                    .estimates
                    .iter()
                    .map(|e| e + amplitude * (2.0 * rng.random::<f64>() - 1.0))
                    .collect(),
            };
            averaged_mse(&c, &d, lower, upper)
        })
        .collect();
    let mut single_entry = Vec::new();
    for y in [0u64, 1, 2, 5, 10, 20, 50] {
        if (y as usize) < bayes_dict.len() {
            let mut d = bayes_dict.clone();
            d.estimates[y as usize] += amplitude;
            single_entry.push((y, averaged_mse(&c, &d, lower, upper)));
        }
    }
    let bayes_is_minimum = mle >= bayes
        && perturbed.iter().all(|v| *v > bayes)
        && single_entry.iter().all(|(_, v)| *v > bayes);
    Ok(OptimalBiasReport {
        bayes,
        mle,
        perturbed,
        single_entry,
        bayes_is_minimum,
    })
}
