//! Half-mass ellipse of a two-dimensional Gaussian kernel.

use constrained_crb::analysis::config::EllipseConfig;
use constrained_crb::analysis::report::{ellipse, write_ellipse};

fn main() -> constrained_crb::error::Result<()> {
    let e = ellipse(&EllipseConfig {
        kernel: [[4.0, 1.0], [1.0, 2.0]],
        center: [0.5, 0.5],
    })?;
    println!("semi-axes {:?}", e.semi_axes);
    println!("directions {:?}", e.directions);
    println!("area {:.6}", e.area());
    for f in write_ellipse(&e, &std::env::temp_dir().join("ellipse"))? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
