//! Exact estimator moments by summing over Poisson outcomes, and the
//! optimal-bias property of the posterior mean.

use constrained_crb::estimators::{bayes_dictionary, exact_moments, mle_dictionary, optimal_bias_check};
use constrained_crb::models::{Model, ModelSpec, Uniform1Spec};

fn main() -> constrained_crb::error::Result<()> {
    let m = Model::new(ModelSpec::Uniform1(Uniform1Spec {
        n_mean: 200.0,
        eta: 0.7,
        n: 2,
    }))?;
    let mle = mle_dictionary(&m, 0.0, 1.0)?;
    let bayes = bayes_dictionary(&m, 0.0, 1.0)?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>10}", "A", "bias MLE", "√MSE MLE", "bias Bayes", "√MSE Bayes", "1/√F");
    for a in [0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
        let (x, y) = (exact_moments(&m, a, &mle)?, exact_moments(&m, a, &bayes)?);
        println!(
            "{a:>5} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            x.bias,
            x.mse.sqrt(),
            y.bias,
            y.mse.sqrt(),
            1.0 / (1568.0 * a * a).sqrt()
        );
    }
    let r = optimal_bias_check(&m, 0.0, 1.0, 50, 0.05, 3)?;
    let best_perturbed = r.perturbed.iter().cloned().fold(f64::INFINITY, f64::min);
    println!(
        "\naveraged MSE: Bayes {:.6e}  MLE {:.6e}  best perturbed {:.6e}  Bayes is minimum: {}",
        r.bayes, r.mle, best_perturbed, r.bayes_is_minimum
    );
    Ok(())
}
