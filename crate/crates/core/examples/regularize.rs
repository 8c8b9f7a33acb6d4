//! Finite-probe regularization at a dark point and the profile-width
//! examples.

use constrained_crb::fisher::fim_poisson;
use constrained_crb::models::{BoxDomain, Model, ModelSpec, TwoPixelSpec};
use constrained_crb::regularizer::{profile_width_closed, profile_width_numeric, regularize_1d, regularize_fim, ProbeProfile};

fn main() -> constrained_crb::error::Result<()> {
    // F(A) = 1568 A² vanishes at A = 0
    let f = |a: f64| Ok(1568.0 * a * a);
    for a in [0.0, 0.05, 0.2, 0.5] {
        let reg = regularize_1d(f, a, 0.0, 1.0)?;
        println!("A = {a:<4}  F = {:>8.3}  F̃ = {reg:>8.3}  Δ̃ = {:.4}", f(a)?, reg.powf(-0.5));
    }

    let two = Model::new(ModelSpec::TwoPixel(TwoPixelSpec {
        n_mean: 1000.0,
        eta: 0.7,
        h0: 1.0,
        h1: 0.8,
    }))?;
    let theta = [0.0, 0.6];
    let reg = regularize_fim(|p| fim_poisson(&two, p), &theta, &BoxDomain::unit(2))?;
    println!("\nTwoPixel at {theta:?}\nF =\n{}F̃ =\n{}", fim_poisson(&two, &theta)?.matrix, reg.matrix);

    println!("profile    numeric    closed");
    for p in [ProbeProfile::Y1 { x0: 1.0, sigma: 1.0 }, ProbeProfile::Y2 { k: 4.0, sigma: 1.0 }] {
        println!("{p:?}  {:.6}  {:.6}", profile_width_numeric(&p)?, profile_width_closed(&p)?);
    }
    Ok(())
}
