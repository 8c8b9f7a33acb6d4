//! Maximum-likelihood, least-squares and posterior-mean estimators.

use crate::error::{Error, Result};
use crate::models::{check_finite, BoxDomain, SignalModel};
use crate::quadrature::{adaptive_simpson_vec, SimpsonOptions};

use super::optimize::{minimize_multistart, LeastSquares, OptimizerOptions, PoissonNll};

/// Relative tolerance of every posterior-mean integral.
pub const BAYES_TOL: f64 = 1e-8;

fn check_counts<M: SignalModel + ?Sized>(model: &M, counts: &[f64], domain: &BoxDomain) -> Result<()> {
    if counts.len() != model.signal_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.signal_dim(),
            got: counts.len(),
        });
    }
    domain.check_dim(model.param_dim())?;
    if counts.iter().any(|y| !(y.is_finite() && *y >= 0.0)) {
        return Err(Error::Domain("counts must be finite and nonnegative".into()));
    }
    Ok(())
}

/// Seed derived from the data so that repeated fits of the same counts are
/// identical.
fn data_seed(counts: &[f64], base: u64) -> u64 {
    counts.iter().fold(base ^ 0x51_7cc1_b727_220a, |h, y| {
        (h ^ y.to_bits()).wrapping_mul(0x100_0000_01b3).rotate_left(17)
    })
}

/// Maximum-likelihood estimate over the box with explicit optimizer options.
pub fn mle_constrained_with<M: SignalModel + ?Sized>(
    model: &M,
    counts: &[f64],
    domain: &BoxDomain,
    opts: &OptimizerOptions,
) -> Result<Vec<f64>> {
    check_counts(model, counts, domain)?;
    if let Some(x) = model.closed_form_mle(counts, domain) {
        return Ok(x);
    }
    let mut opts = opts.clone();
    opts.seed = data_seed(counts, opts.seed);
    let obj = PoissonNll { model, counts };
    minimize_multistart(&obj, domain, &opts).map(|r| r.0)
}

/// `argmax_θ∈box L(Y|S(θ))` for Poisson counts; closed form where the model
/// provides one, multi-start scoring iterations otherwise.
pub fn mle_constrained<M: SignalModel + ?Sized>(model: &M, counts: &[f64], domain: &BoxDomain) -> Result<Vec<f64>> {
    mle_constrained_with(model, counts, domain, &OptimizerOptions::default())
}

/// Least-squares fit with explicit optimizer options.
pub fn ls_estimate_with<M: SignalModel + ?Sized>(
    model: &M,
    counts: &[f64],
    domain: &BoxDomain,
    opts: &OptimizerOptions,
) -> Result<Vec<f64>> {
    check_counts(model, counts, domain)?;
    let mut opts = opts.clone();
    opts.seed = data_seed(counts, opts.seed);
    let obj = LeastSquares { model, counts };
    minimize_multistart(&obj, domain, &opts).map(|r| r.0)
}

/// `argmin_θ∈box |Y − S(θ)|²`.
pub fn ls_estimate<M: SignalModel + ?Sized>(model: &M, counts: &[f64], domain: &BoxDomain) -> Result<Vec<f64>> {
    ls_estimate_with(model, counts, domain, &OptimizerOptions::default())
}

fn log_likelihood(signal: &[f64], counts: &[f64]) -> f64 {
    -super::optimize::poisson_nll(signal, counts)
}

/// Posterior mean under a flat prior on the box (at most two parameters).
///
/// The likelihood is normalized by its value at the maximum-likelihood point
/// before integration; each dimension is integrated by adaptive Simpson.
pub fn bayes_mean<M: SignalModel + ?Sized>(model: &M, counts: &[f64], domain: &BoxDomain) -> Result<Vec<f64>> {
    check_counts(model, counts, domain)?;
    let n = model.param_dim();
    if n > 2 {
        return Err(Error::DimensionTooLarge(n));
    }
    for k in 0..n {
        if !(domain.lower[k].is_finite() && domain.upper[k].is_finite()) {
            return Err(Error::Domain("posterior mean needs a bounded box".into()));
        }
    }
    let peak = mle_constrained(model, counts, domain)?;
    let ref_ll = log_likelihood(&model.signal(&peak)?, counts);
    let opts = SimpsonOptions::with_rel_tol(BAYES_TOL);
    // errors inside the integrand are carried out through this slot
    let mut failure: Option<Error> = None;
    let mut weight = |theta: &[f64]| -> f64 {
        match model.signal(theta) {
            Ok(s) => (log_likelihood(&s, counts) - ref_ll).exp(),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let out = if n == 1 {
        let [z, m] = adaptive_simpson_vec(
            |a| {
                let w = weight(&[a]);
                [w, a * w]
            },
            domain.lower[0],
            domain.upper[0],
            &opts,
        )?;
        vec![m / z]
    } else {
        let mut inner_failure: Option<Error> = None;
        let [z, m0, m1] = adaptive_simpson_vec(
            |a| {
                match adaptive_simpson_vec(
                    |b| {
                        let w = weight(&[a, b]);
                        [w, b * w]
                    },
                    domain.lower[1],
                    domain.upper[1],
                    &opts,
                ) {
                    Ok([w, wb]) => [w, a * w, wb],
                    Err(e) => {
                        inner_failure.get_or_insert(e);
                        [0.0; 3]
                    }
                }
            },
            domain.lower[0],
            domain.upper[0],
            &opts,
        )?;
        if let Some(e) = inner_failure {
            return Err(e);
        }
        vec![m0 / z, m1 / z]
    };
    if let Some(e) = failure {
        return Err(e);
    }
    check_finite(&out)?;
    let mut out = out;
    domain.project(&mut out);
    Ok(out)
}
