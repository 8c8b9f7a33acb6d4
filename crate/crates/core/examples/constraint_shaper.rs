//! Gaussian shrinking against box constraints.

use constrained_crb::fisher::fim_poisson;
use constrained_crb::models::{BoxDomain, Model, ModelSpec, TwoPixelSpec};
use constrained_crb::shaper::{box_constraints, correct_fim, correct_fim_1d_closed};

fn main() -> constrained_crb::error::Result<()> {
    println!("1D, F = 1568 A²");
    for a in [0.9, 0.95, 0.98, 1.0] {
        let f = 1568.0 * a * a;
        let c = correct_fim_1d_closed(f, a, 0.0, 1.0)?;
        println!("  A = {a:<4}  F = {f:>8.2}  F̃ = {c:>8.2}");
    }

    let m = Model::new(ModelSpec::TwoPixel(TwoPixelSpec {
        n_mean: 50.0,
        eta: 0.7,
        h0: 1.0,
        h1: 0.8,
    }))?;
    let theta = [0.9, 0.9];
    let f = fim_poisson(&m, &theta)?;
    let (fc, center, report) = correct_fim(&f, &theta, &box_constraints(&BoxDomain::unit(2)))?;
    println!("\nTwoPixel N = 50 at {theta:?}: {} shrink steps", report.iterations);
    for s in &report.steps {
        println!(
            "  constraint {}  P {:.4} -> {:.4}  ξ = {:.4}",
            s.constraint, s.p_before, s.p_target, s.xi
        );
    }
    println!("  centre {center:.4?}");
    println!("  Tr F⁻¹ = {:.5}  Tr F̃⁻¹ = {:.5}", f.total_variance()?, fc.total_variance()?);
    Ok(())
}
