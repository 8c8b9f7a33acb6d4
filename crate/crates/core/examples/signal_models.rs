//! Expected signals of the four forward models.

use constrained_crb::models::{BiphotonG2Spec, Model, ModelSpec, SignalModel, SlitArraySpec, TwoPixelSpec, Uniform1Spec};

fn main() -> constrained_crb::error::Result<()> {
    let uniform = Model::new(ModelSpec::Uniform1(Uniform1Spec {
        n_mean: 200.0,
        eta: 0.7,
        n: 2,
    }))?;
    for a in [0.25, 0.5, 1.0] {
        println!("Uniform1  A = {a:<4}  S = {:.4}", uniform.signal(&[a])?[0]);
    }

    let two = Model::new(ModelSpec::TwoPixel(TwoPixelSpec {
        n_mean: 1000.0,
        eta: 0.7,
        h0: 1.0,
        h1: 0.8,
    }))?;
    println!("TwoPixel  A = (0.2, 0.9)  S = {:?}", two.signal(&[0.2, 0.9])?.means);

    let slit = Model::new(ModelSpec::SlitArray(SlitArraySpec {
        n_mean: 1e4,
        pixels: 4,
        d: 0.5,
        d_r: 1.0,
        grid: Default::default(),
    }))?;
    let s = slit.signal(&[1.0, 0.0, 1.0, 1.0])?;
    println!("SlitArray {} detectors, total {:.1} counts", s.len(), s.iter().sum::<f64>());

    let g2 = Model::new(ModelSpec::BiphotonG2(BiphotonG2Spec {
        n_mean: 1e5,
        pixels: 4,
        d: 0.5,
        d_r: 1.0,
        sigma_c: 0.5,
        grid: Default::default(),
    }))?;
    let s = g2.signal(&[1.0, 0.0, 1.0, 1.0])?;
    println!("BiphotonG2 {} detector pairs, total {:.1} coincidences", s.len(), s.iter().sum::<f64>());
    Ok(())
}
