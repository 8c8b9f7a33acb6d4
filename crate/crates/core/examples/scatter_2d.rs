//! Two-parameter estimates with sample and predicted half-mass ellipses.

use constrained_crb::analysis::config::Scatter2dConfig;
use constrained_crb::analysis::scatter::compute;

fn main() -> constrained_crb::error::Result<()> {
    let cfg = Scatter2dConfig {
        samples: 200,
        ..Scatter2dConfig::default()
    };
    let result = compute(&cfg)?;
    for c in &result.cases {
        let s = &c.summary;
        println!(
            "A = {:?} N = {:<5} Tr F⁻¹ = {:<9.5} Tr F̃⁻¹ = {:<9.5} MLE Tr cov = {:<9.5} Bayes Tr cov = {:<9.5} ‖F̃ − F‖/‖F‖ = {:.1e}",
            s.theta,
            s.n_mean,
            s.trace_standard.unwrap_or(f64::INFINITY),
            s.trace_corrected,
            s.mle_covariance_trace(),
            s.bayes_covariance_trace(),
            s.correction_change
        );
    }
    let dir = std::env::temp_dir().join("scatter_2d");
    for f in result.write(&dir)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
