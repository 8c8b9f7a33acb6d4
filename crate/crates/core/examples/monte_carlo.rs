//! Seeded Monte Carlo batches of the three estimators.

use constrained_crb::estimators::{mc_stats, run_mc, write_estimates_csv, Estimator, OptimizerOptions};
use constrained_crb::models::{default_labels, BoxDomain, Model, ModelSpec, TwoPixelSpec};

fn main() -> constrained_crb::error::Result<()> {
    let m = Model::new(ModelSpec::TwoPixel(TwoPixelSpec {
        n_mean: 1000.0,
        eta: 0.7,
        h0: 1.0,
        h1: 0.8,
    }))?;
    let theta = [0.2, 0.2];
    let domain = BoxDomain::unit(2);
    let opts = OptimizerOptions::default();
    for est in [Estimator::Mle, Estimator::LeastSquares, Estimator::Bayes] {
        let run = run_mc(&m, &theta, est, &domain, 11, 200, &opts)?;
        let s = mc_stats(&run.estimates, &theta)?;
        println!(
            "{est:?}: bias {:.4?}  total variance {:.5}  MSE {:.5}",
            s.bias, s.total_variance, s.total_mse
        );
        if est == Estimator::Mle {
            let path = std::env::temp_dir().join("mle_estimates.csv");
            write_estimates_csv(&path, &default_labels(2), &run)?;
            println!("  samples written to {}", path.display());
        }
    }
    Ok(())
}
