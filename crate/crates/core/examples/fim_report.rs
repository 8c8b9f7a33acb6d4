//! Standard, regularized and corrected information of a single point as a
//! lossless JSON report.

use constrained_crb::analysis::config::FimReportConfig;
use constrained_crb::analysis::report::{fim_report, FimReport};
use constrained_crb::models::{ModelSpec, SlitArraySpec};

fn main() -> constrained_crb::error::Result<()> {
    let cfg = FimReportConfig {
        model: ModelSpec::SlitArray(SlitArraySpec {
            n_mean: 1e4,
            pixels: 10,
            d: 0.5,
            d_r: 1.0,
            grid: Default::default(),
        }),
        theta: vec![1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0],
        ..FimReportConfig::default()
    };
    let r = fim_report(&cfg)?;
    let show = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ");
    println!("standard eigenvalues    {}", show(&r.standard_eigenvalues));
    println!("regularized eigenvalues {}", show(r.regularized_eigenvalues.as_deref().unwrap_or_default()));
    println!("Tr F⁻¹ {:?}  Tr F̃⁻¹ {:?}", r.trace_standard, r.trace_corrected);
    let text = r.to_json()?;
    assert_eq!(FimReport::from_json(&text)?, r);
    println!("report round-trips through {} bytes of JSON", text.len());
    Ok(())
}
