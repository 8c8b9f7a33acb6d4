//! Reproducible Poisson sampling of signal vectors.
//!
//! Every draw uses its own generator, keyed by `(seed, sample, component)`,
//! so batches are identical regardless of how the work is split across
//! threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::SignalModel;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for one `(seed, sample, component)` triple.
pub fn substream(seed: u64, sample: u64, component: u64) -> ChaCha8Rng {
    let key = splitmix(splitmix(splitmix(seed) ^ sample) ^ component.wrapping_mul(0x2545_f491_4f6c_dd1d));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(sample);
    rng
}

/// One Poisson draw with mean `mean ≥ 0`.
pub fn poisson_draw(mean: f64, rng: &mut impl Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as u64
}

/// Draw the counts of sample `sample` for the expected signal `means`.
pub fn draw_counts(means: &[f64], seed: u64, sample: u64) -> Vec<u64> {
    means
        .iter()
        .enumerate()
        .map(|(i, &m)| poisson_draw(m, &mut substream(seed, sample, i as u64)))
        .collect()
}

/// Poisson realizations of a model signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub seed: u64,
    pub count: usize,
    /// `outcomes[s][i]`: counts of component `i` in sample `s`.
    pub outcomes: Vec<Vec<u64>>,
}

impl SampleBatch {
    /// Sample `s` as floating-point counts.
    pub fn counts(&self, s: usize) -> Vec<f64> {
        self.outcomes[s].iter().map(|&y| y as f64).collect()
    }
}

/// Draw `count` independent signal realizations at `θ`.
pub fn sample_signal<M: SignalModel + ?Sized>(model: &M, theta: &[f64], seed: u64, count: usize) -> Result<SampleBatch> {
    let means = model.signal(theta)?;
    let outcomes = (0..count as u64)
        .into_par_iter()
        .map(|s| draw_counts(&means, seed, s))
        .collect();
    Ok(SampleBatch { seed, count, outcomes })
}
