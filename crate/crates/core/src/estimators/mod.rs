//! Monte Carlo validation: Poisson sampling, the three estimators, batch
//! statistics and exact outcome enumeration for one-parameter models.

mod enumerate;
mod fit;
pub mod optimize;
mod sampling;
mod stats;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::{BoxDomain, SignalModel};

pub use enumerate::{
    averaged_mse, bayes_dictionary, exact_moments, mle_dictionary, optimal_bias_check, outcome_cutoff,
    outcome_integrals, poisson_pmf, Dictionary, ExactMoments, OptimalBiasReport,
};
pub use fit::{bayes_mean, ls_estimate, ls_estimate_with, mle_constrained, mle_constrained_with, BAYES_TOL};
pub use optimize::OptimizerOptions;
pub use sampling::{draw_counts, poisson_draw, sample_signal, substream, SampleBatch};
pub use stats::{biased_crb_mse, mc_stats, pairwise_sum, McStats};

/// Default batch sizes for one-, two- and many-parameter studies.
pub const BATCH_1D: usize = 10_000;
pub const BATCH_2D: usize = 1_000;
pub const BATCH_MULTI: usize = 1_000;

/// Which estimator a Monte Carlo run applies to every sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    /// Constrained maximum likelihood.
    Mle,
    /// Flat-prior posterior mean.
    Bayes,
    /// Least squares.
    LeastSquares,
}

impl Estimator {
    pub fn estimate<M: SignalModel + ?Sized>(
        &self,
        model: &M,
        counts: &[f64],
        domain: &BoxDomain,
        opts: &OptimizerOptions,
    ) -> Result<Vec<f64>> {
        match self {
            Estimator::Mle => mle_constrained_with(model, counts, domain, opts),
            Estimator::Bayes => bayes_mean(model, counts, domain),
            Estimator::LeastSquares => ls_estimate_with(model, counts, domain, opts),
        }
    }
}

/// Estimates of a Monte Carlo run, in sample order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRun {
    pub seed: u64,
    pub estimates: Vec<Vec<f64>>,
}

/// Draw `count` samples at `θ` and apply `estimator` to each.
///
/// Samples are generated and fitted in parallel; the result does not depend
/// on the number of worker threads.
pub fn run_mc<M: SignalModel + ?Sized>(
    model: &M,
    theta: &[f64],
    estimator: Estimator,
    domain: &BoxDomain,
    seed: u64,
    count: usize,
    opts: &OptimizerOptions,
) -> Result<McRun> {
    let means = model.signal(theta)?;
    let estimates = (0..count as u64)
        .into_par_iter()
        .map(|s| {
            let y: Vec<f64> = draw_counts(&means, seed, s).into_iter().map(|v| v as f64).collect();
            estimator.estimate(model, &y, domain, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(McRun { seed, estimates })
}

/// One CSV row per sample: sample index followed by the estimate.
pub fn write_estimates_csv(path: &Path, labels: &[String], run: &McRun) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["sample".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for (s, e) in run.estimates.iter().enumerate() {
        let mut row = vec![s.to_string()];
        row.extend(e.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON of a statistics summary.
pub fn write_stats_json(path: &Path, stats: &McStats) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, stats)?;
    writeln!(f)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::fim_poisson;
    use crate::models::{DetectorGrid, Model, ModelSpec, SignalVector, SlitArraySpec, TwoPixelSpec, Uniform1Spec};
    use crate::quadrature::{adaptive_simpson, SimpsonOptions};
    use proptest::prelude::*;

    fn uniform() -> Model {
        Model::new(ModelSpec::Uniform1(Uniform1Spec {
            n_mean: 200.0,
            eta: 0.7,
            n: 2,
        }))
        .unwrap()
    }

    fn two_pixel(n_mean: f64) -> Model {
        Model::new(ModelSpec::TwoPixel(TwoPixelSpec {
            n_mean,
            eta: 0.7,
            h0: 1.0,
            h1: 0.8,
        }))
        .unwrap()
    }

    #[test]
    fn sampling_is_deterministic_and_unbiased() {
        let m = uniform();
        let a = sample_signal(&m, &[0.5], 42, 100_000).unwrap();
        let b = sample_signal(&m, &[0.5], 42, 100_000).unwrap();
        assert_eq!(a, b);
        let mean = a.outcomes.iter().map(|o| o[0] as f64).sum::<f64>() / 1e5;
        assert!((mean - 6.125).abs() < 5.0 * (6.125f64 / 1e5).sqrt(), "mean {mean}");
        let dark = sample_signal(&m, &[0.0], 1, 1000).unwrap();
        assert!(dark.outcomes.iter().all(|o| o[0] == 0));
    }

    #[test]
    fn large_means_are_sampled_correctly() {
        for mean in [29.5, 30.0, 450.0, 1e5] {
            let draws: Vec<f64> = (0..20_000)
                .map(|s| poisson_draw(mean, &mut substream(9, s, 0)) as f64)
                .collect();
            let m = draws.iter().sum::<f64>() / draws.len() as f64;
            let v = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
            assert!((m - mean).abs() < 5.0 * (mean / 20_000.0).sqrt(), "mean {mean}: {m}");
            assert!((v / mean - 1.0).abs() < 0.05, "var {mean}: {v}");
        }
    }

    #[test]
    fn one_dimensional_mle_closed_form() {
        let m = uniform();
        let d = BoxDomain::unit(1);
        assert_eq!(mle_constrained(&m, &[0.0], &d).unwrap(), vec![0.0]);
        let a = mle_constrained(&m, &[49.0], &d).unwrap()[0];
        assert!((a - 0.5f64.powf(0.25)).abs() < 1e-12);
        assert!((a - 0.8409).abs() < 1e-4);
        assert_eq!(mle_constrained(&m, &[100.0], &d).unwrap(), vec![1.0]);
    }

    #[test]
    fn two_dimensional_mle_beats_probes() {
        let m = two_pixel(1000.0);
        let d = BoxDomain::unit(2);
        let truth = [0.3, 0.7];
        let s = m.signal(&truth).unwrap();
        let a = mle_constrained(&m, &s, &d).unwrap();
        assert!((a[0] - 0.3).abs() < 1e-6 && (a[1] - 0.7).abs() < 1e-6, "{a:?}");
        // counts beyond the reach of the box: estimate on the boundary
        let top = m.signal(&[1.0, 1.0]).unwrap()[0];
        let a = mle_constrained(&m, &[2.0 * top, 2.0 * top], &d).unwrap();
        assert_eq!(a, vec![1.0, 1.0]);
    }

    #[test]
    fn bayes_mean_examples() {
        let m = uniform();
        let d = BoxDomain::unit(1);
        let b = bayes_mean(&m, &[0.0], &d).unwrap()[0];
        // trapezoid oracle with 10⁶ panels
        let panels = 1_000_000;
        let h = 1.0 / panels as f64;
        let (mut z, mut w) = (0.0, 0.0);
        for i in 0..=panels {
            let a = i as f64 * h;
            let f = (-98.0 * a.powi(4)).exp() * if i == 0 || i == panels { 0.5 } else { 1.0 };
            z += f;
            w += a * f;
        }
        assert!((b - w / z).abs() < 1e-9, "{b} vs {}", w / z);
        assert!(matches!(
            bayes_mean(&Model::new(ModelSpec::SlitArray(slit_spec(0.8))).unwrap(), &[0.0; 41], &BoxDomain::unit(10)),
            Err(crate::Error::DimensionTooLarge(10)) | Err(crate::Error::DimensionMismatch { .. })
        ));
    }

    struct Symmetric;

    impl SignalModel for Symmetric {
        fn param_dim(&self) -> usize {
            2
        }
        fn signal_dim(&self) -> usize {
            2
        }
        fn signal(&self, t: &[f64]) -> Result<SignalVector> {
            // likelihood symmetric about (0.5, 0.5) for counts (10, 10)
            let f = |x: f64| 10.0 + 40.0 * (x - 0.5).powi(2);
            Ok(SignalVector {
                means: vec![f(t[0]), f(t[1])],
            })
        }
    }

    #[test]
    fn symmetric_posterior_is_centred() {
        let b = bayes_mean(&Symmetric, &[10.0, 10.0], &BoxDomain::unit(2)).unwrap();
        assert!((b[0] - 0.5).abs() < 1e-8 && (b[1] - 0.5).abs() < 1e-8, "{b:?}");
    }

    #[test]
    fn bayes_quadrature_is_converged() {
        let m = uniform();
        let d = BoxDomain::unit(1);
        for y in [0.0, 3.0, 40.0] {
            let b = bayes_mean(&m, &[y], &d).unwrap()[0];
            let opts = SimpsonOptions {
                initial_panels: 4096,
                ..SimpsonOptions::with_rel_tol(1e-12)
            };
            let w = |a: f64| poisson_pmf(y as u64, 98.0 * a.powi(4));
            let z = adaptive_simpson(w, 0.0, 1.0, &opts).unwrap();
            let n = adaptive_simpson(|a| a * w(a), 0.0, 1.0, &opts).unwrap();
            assert!((b - n / z).abs() < 1e-8);
        }
        // matches the per-outcome dictionary
        let dict = bayes_dictionary(&m, 0.0, 1.0).unwrap();
        assert!((dict.estimates[7] - bayes_mean(&m, &[7.0], &d).unwrap()[0]).abs() < 1e-8);
    }

    fn slit_spec(d: f64) -> SlitArraySpec {
        SlitArraySpec {
            n_mean: 1e4,
            pixels: 10,
            d,
            d_r: 1.0,
            grid: DetectorGrid::default(),
        }
    }

    #[test]
    fn noiseless_least_squares() {
        let m = two_pixel(1000.0);
        let s = m.signal(&[0.4, 0.8]).unwrap();
        let a = ls_estimate(&m, &s, &BoxDomain::unit(2)).unwrap();
        let r: f64 = m.signal(&a).unwrap().iter().zip(s.iter()).map(|(x, y)| (x - y).powi(2)).sum();
        assert!(r <= 1e-12);
    }

    #[test]
    fn noiseless_slit_inversion() {
        let m = Model::new(ModelSpec::SlitArray(slit_spec(0.8))).unwrap();
        let truth = [1.0, 1.0, 0.9, 1.0, 0.9, 0.9, 1.0, 1.0, 0.9, 1.0];
        let s = m.signal(&truth).unwrap();
        let open = BoxDomain::uniform(10, 0.0, f64::INFINITY).unwrap();
        let a = ls_estimate(&m, &s, &open).unwrap();
        for (x, t) in a.iter().zip(&truth) {
            assert!((x - t).abs() < 1e-4, "{a:?}");
        }
    }

    #[test]
    fn clipped_components_sit_on_bounds() {
        let m = two_pixel(1000.0);
        // counts that need A₁ > 1 and A₂ < 0 without the box
        let y = [450.0, 260.0];
        let a = ls_estimate(&m, &y, &BoxDomain::unit(2)).unwrap();
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(a.iter().any(|v| *v == 0.0 || *v == 1.0), "{a:?}");
    }

    #[test]
    fn stats_examples() {
        let t = vec![0.3, 0.6];
        let s = mc_stats(&[t.clone(), t.clone(), t.clone()], &t).unwrap();
        assert_eq!((s.total_variance, s.total_mse), (0.0, 0.0));
        assert!(s.bias.iter().all(|b| *b == 0.0));
        let s = mc_stats(&[vec![0.4, 0.6], vec![0.2, 0.6]], &t).unwrap();
        assert!((s.covariance[0][0] - 0.02).abs() < 1e-15);
        assert!(s.bias.iter().all(|b| b.abs() < 1e-15));
        assert!((s.total_mse - 0.01).abs() < 1e-15);
        assert!(matches!(mc_stats(&[t.clone()], &t), Err(crate::Error::InsufficientSamples(1))));
    }

    #[test]
    fn biased_crb_examples() {
        let f = vec![4.0; 5];
        let zero = biased_crb_mse(&f, &[0.0; 5], 0.1).unwrap();
        assert!(zero.iter().all(|v| (v - 0.25).abs() < 1e-15));
        let grid: Vec<f64> = (0..5).map(|i| 0.1 * i as f64).collect();
        let bias: Vec<f64> = grid.iter().map(|a| 0.7 - a).collect();
        let sat = biased_crb_mse(&f, &bias, 0.1).unwrap();
        for (v, b) in sat.iter().zip(&bias) {
            assert!((v - b * b).abs() < 1e-12);
        }
        assert!(matches!(biased_crb_mse(&[1.0; 2], &[0.0; 2], 0.1), Err(crate::Error::GridTooCoarse(2))));
    }

    #[test]
    fn mle_batch_matches_exact_moments() {
        let m = uniform();
        let run = run_mc(&m, &[0.5], Estimator::Mle, &BoxDomain::unit(1), 11, 10_000, &OptimizerOptions::default())
            .unwrap();
        let s = mc_stats(&run.estimates, &[0.5]).unwrap();
        let crb = fim_poisson(&m, &[0.5]).unwrap().matrix[(0, 0)].powf(-0.5);
        assert!((crb - 0.0505).abs() < 1e-4);
        let exact = exact_moments(&m, 0.5, &mle_dictionary(&m, 0.0, 1.0).unwrap()).unwrap();
        // standard error of a mean of squared errors, from the fourth moment
        let sq: Vec<f64> = run.estimates.iter().map(|e| (e[0] - 0.5).powi(2)).collect();
        let var_sq = sq.iter().map(|v| (v - s.total_mse).powi(2)).sum::<f64>() / (sq.len() - 1) as f64;
        let se = (var_sq / sq.len() as f64).sqrt();
        assert!((s.total_mse - exact.mse).abs() < 5.0 * se, "{} vs {}", s.total_mse, exact.mse);
        assert!((s.bias[0] - exact.bias).abs() < 5.0 * (exact.variance / 1e4).sqrt());
        let again = run_mc(&m, &[0.5], Estimator::Mle, &BoxDomain::unit(1), 11, 10_000, &OptimizerOptions::default())
            .unwrap();
        assert_eq!(run, again);
    }

    fn exact_ratio_curve(dict: &Dictionary, step: f64) -> Vec<(f64, f64)> {
        let m = uniform();
        let n = (1.0 / step).round() as usize;
        let grid: Vec<f64> = (1..=n).map(|i| i as f64 * step).collect();
        let mom: Vec<ExactMoments> = grid.iter().map(|a| exact_moments(&m, *a, dict).unwrap()).collect();
        let f: Vec<f64> = grid.iter().map(|a| 1568.0 * a * a).collect();
        let bias: Vec<f64> = mom.iter().map(|x| x.bias).collect();
        let pred = biased_crb_mse(&f, &bias, step).unwrap();
        grid.into_iter().zip(pred.iter().zip(&mom).map(|(p, x)| p / x.mse)).collect()
    }

    #[test]
    fn exact_moments_predict_biased_crb() {
        let m = uniform();
        let dict = mle_dictionary(&m, 0.0, 1.0).unwrap();
        let ratios = exact_ratio_curve(&dict, 0.01);
        // the first-order bias correction holds once Y = 0 outcomes are rare
        for (a, r) in &ratios {
            if (0.55..=0.9).contains(a) {
                assert!((r - 1.0).abs() < 0.05, "A = {a}: ratio {r}");
            }
        }
        // and overestimates the spread where the MLE is pinned to zero
        let worst = ratios.iter().filter(|(a, _)| (0.3..=0.5).contains(a)).map(|(_, r)| *r).fold(1.0, f64::min);
        assert!(worst < 0.7);
        // clipping pulls the estimate down near the upper bound
        assert!(exact_moments(&m, 1.0, &dict).unwrap().bias < 0.0);
    }

    #[test]
    fn constrained_regime_beats_crb() {
        let m = uniform();
        let run = run_mc(&m, &[1.0], Estimator::Mle, &BoxDomain::unit(1), 5, 10_000, &OptimizerOptions::default())
            .unwrap();
        let s = mc_stats(&run.estimates, &[1.0]).unwrap();
        assert!(s.total_mse < 1.0 / 1568.0);
        let m2 = two_pixel(50.0);
        let run = run_mc(&m2, &[0.9, 0.9], Estimator::Mle, &BoxDomain::unit(2), 5, 1000, &OptimizerOptions::default())
            .unwrap();
        let s = mc_stats(&run.estimates, &[0.9, 0.9]).unwrap();
        let crb = fim_poisson(&m2, &[0.9, 0.9]).unwrap().total_variance().unwrap();
        assert!(s.total_mse < crb, "{} vs {crb}", s.total_mse);
    }

    #[test]
    fn posterior_mean_minimizes_averaged_error() {
        let r = optimal_bias_check(&uniform(), 0.0, 1.0, 50, 0.05, 3).unwrap();
        assert!(r.bayes_is_minimum);
        assert!(r.mle >= r.bayes);
        assert_eq!(r.perturbed.len(), 50);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]

        #[test]
        fn mse_splits_into_variance_and_bias(
            xs in proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, 3), 2..40),
            t in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let s = mc_stats(&xs, &t).unwrap();
            let direct = xs.iter().map(|x| x.iter().zip(&t).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sum::<f64>()
                / xs.len() as f64;
            prop_assert!((s.total_mse - direct).abs() <= 1e-10 * direct.max(1e-300));
            prop_assert!(s.total_mse >= s.total_variance - 1e-12);
            let eig = crate::linalg::sym_eigen(&s.covariance_matrix());
            prop_assert!(eig.min() >= -1e-12 * eig.max().abs().max(1.0));
        }

        #[test]
        fn estimates_are_feasible(y1 in 0u32..900, y2 in 0u32..900) {
            let m = two_pixel(1000.0);
            let d = BoxDomain::unit(2);
            let y = [y1 as f64, y2 as f64];
            prop_assert!(d.contains(&mle_constrained(&m, &y, &d).unwrap()));
            prop_assert!(d.contains(&ls_estimate(&m, &y, &d).unwrap()));
        }
    }
}
