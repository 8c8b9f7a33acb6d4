//! Poisson Fisher information: analytic Jacobian, outcome enumeration and the
//! Gaussian-noise approximation.

use constrained_crb::fisher::{fim_bruteforce, fim_gaussian_noise, fim_poisson};
use constrained_crb::models::{Model, ModelSpec, TwoPixelSpec, Uniform1Spec};

fn main() -> constrained_crb::error::Result<()> {
    let m = Model::new(ModelSpec::Uniform1(Uniform1Spec {
        n_mean: 200.0,
        eta: 0.7,
        n: 2,
    }))?;
    println!("{:>5} {:>12} {:>12} {:>12}", "A", "F", "4n²Nη²A²", "F_Gauss/F");
    for a in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let f = fim_poisson(&m, &[a])?.matrix[(0, 0)];
        let closed = 16.0 * 200.0 * 0.49 * a * a;
        let g = fim_gaussian_noise(&m, &[a])?.matrix[(0, 0)];
        println!("{a:>5} {f:>12.6} {closed:>12.6} {:>12.6}", g / f);
    }

    let two = Model::new(ModelSpec::TwoPixel(TwoPixelSpec {
        n_mean: 50.0,
        eta: 0.7,
        h0: 1.0,
        h1: 0.8,
    }))?;
    let theta = [0.6, 0.4];
    let f = fim_poisson(&two, &theta)?;
    let b = fim_bruteforce(&two, &theta, 1e-14)?;
    println!("\nTwoPixel at {theta:?}\nanalytic\n{}enumerated\n{}", f.matrix, b.matrix);
    println!("Tr F⁻¹ = {:.6}", f.total_variance()?);
    Ok(())
}
