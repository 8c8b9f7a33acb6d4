//! Total variance against slit width for a ten-slit object with dark slits,
//! and the same scan split into windows.

use constrained_crb::analysis::config::{ScanConfig, WindowConfig};
use constrained_crb::analysis::resolution::compute;
use constrained_crb::analysis::cell;
use constrained_crb::models::{ModelSpec, SlitArraySpec};
use constrained_crb::regularizer::ProbeRange;

fn main() -> constrained_crb::error::Result<()> {
    let mut cfg = ScanConfig {
        model: ModelSpec::SlitArray(SlitArraySpec {
            n_mean: 1e4,
            pixels: 10,
            d: 0.5,
            d_r: 1.0,
            grid: Default::default(),
        }),
        grid: vec![0.3, 0.4, 0.5, 0.6, 0.8],
        object: vec![1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0],
        n_mean: None,
        threshold: 0.1,
        samples: 100,
        seed: 5,
        window: WindowConfig { size: 6, overlap: 2 },
        probe_range: ProbeRange::DomainOrExtent,
        annotations: Vec::new(),
    };
    let scan = compute(&cfg, false)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "d/d_R", "Δ²_std", "Δ²_corr", "Var LS", "MSE LS");
    for r in &scan.rows {
        println!(
            "{:>6} {:>10} {:>10.5} {:>10.5} {:>10.5}",
            r.d_over_dr,
            cell(r.delta2_std),
            r.delta2_corr.unwrap_or(f64::INFINITY),
            r.delta2_var_mc,
            r.delta2_mse_mc
        );
    }
    println!("d_min: {:?}", scan.summary.d_min);

    cfg.samples = 0;
    let windowed = compute(&cfg, true)?;
    println!("\nwindows {:?}", windowed.summary.windows.as_deref().unwrap_or_default());
    for r in &windowed.rows {
        println!("{:>6} Δ²_corr {:.5}", r.d_over_dr, r.delta2_corr.unwrap_or(f64::INFINITY));
    }
    let dir = std::env::temp_dir().join("resolution_scan");
    for f in scan.write(&dir)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
