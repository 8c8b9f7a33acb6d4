//! Half-mass ellipses `ΔθᵀKΔθ = 2 ln 2` of two-dimensional Gaussians.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_symmetric, sym_eigen, SINGULAR_RATIO};

/// Level of the quadratic form that encloses half of the Gaussian mass.
pub const HALF_MASS_LEVEL: f64 = 2.0 * std::f64::consts::LN_2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipseSpec {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    /// Unit direction of each semi-axis.
    pub directions: [[f64; 2]; 2],
}

impl EllipseSpec {
    /// Area `π a b`.
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.semi_axes[0] * self.semi_axes[1]
    }

    /// Whether `p` lies inside or on the ellipse.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let d = [p[0] - self.center[0], p[1] - self.center[1]];
        let q: f64 = (0..2)
            .map(|i| {
                let u = d[0] * self.directions[i][0] + d[1] * self.directions[i][1];
                (u / self.semi_axes[i]).powi(2)
            })
            .sum();
        q <= 1.0
    }

    /// `n` points on the outline.
    pub fn outline(&self, n: usize) -> Vec<(f64, f64)> {
        (0..=n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                let (c, s) = (self.semi_axes[0] * t.cos(), self.semi_axes[1] * t.sin());
                (
                    self.center[0] + c * self.directions[0][0] + s * self.directions[1][0],
                    self.center[1] + c * self.directions[0][1] + s * self.directions[1][1],
                )
            })
            .collect()
    }
}

/// Ellipse `(θ − c)ᵀK(θ − c) = 2 ln 2`: semi-axis `√(2 ln 2/λ_i)` along the
/// eigenvector `v_i` of `K`.
pub fn ellipse_from_quadratic_form(kernel: &DMatrix<f64>, center: [f64; 2]) -> Result<EllipseSpec> {
    if kernel.nrows() != 2 || kernel.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: kernel.nrows().max(kernel.ncols()),
        });
    }
    check_symmetric(kernel, 1e-12)?;
    let eig = sym_eigen(kernel);
    let (lo, hi) = (eig.min(), eig.max());
    if !(hi > 0.0) || !(lo > SINGULAR_RATIO * hi) {
        return Err(Error::SingularKernel {
            min_eigenvalue: lo,
            max_eigenvalue: hi,
        });
    }
    let axis = |i: usize| [eig.vectors[(0, i)], eig.vectors[(1, i)]];
    Ok(EllipseSpec {
        center,
        semi_axes: [(HALF_MASS_LEVEL / eig.values[0]).sqrt(), (HALF_MASS_LEVEL / eig.values[1]).sqrt()],
        directions: [axis(0), axis(1)],
    })
}

/// Ellipse of a sample covariance `C` around its mean (kernel `C⁻¹`).
pub fn covariance_ellipse(cov: &DMatrix<f64>, mean: [f64; 2]) -> Result<EllipseSpec> {
    let inv = crate::linalg::spd_inverse(cov)?;
    ellipse_from_quadratic_form(&crate::linalg::symmetrize(inv), mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn identity_gives_circle() {
        let e = ellipse_from_quadratic_form(&DMatrix::identity(2, 2), [0.0, 0.0]).unwrap();
        for a in e.semi_axes {
            assert!((a - 1.17741).abs() < 1e-5);
        }
    }

    #[test]
    fn diagonal_kernel_axes() {
        let k = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let e = ellipse_from_quadratic_form(&k, [1.0, 2.0]).unwrap();
        let r = HALF_MASS_LEVEL.sqrt();
        // ascending eigenvalues: the long axis (λ = 1) comes first
        assert!((e.semi_axes[0] - r).abs() < 1e-12);
        assert!((e.semi_axes[1] - r / 2.0).abs() < 1e-12);
        assert!(e.directions[0][1].abs() == 1.0 && e.directions[1][0].abs() == 1.0);
        let dot = e.directions[0][0] * e.directions[1][0] + e.directions[0][1] * e.directions[1][1];
        assert!(dot.abs() < 1e-10);
    }

    #[test]
    fn singular_kernel_is_rejected() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(ellipse_from_quadratic_form(&k, [0.0, 0.0]), Err(Error::SingularKernel { .. })));
    }

    #[test]
    fn half_of_the_samples_fall_inside() {
        // kernel K = C⁻¹ with C = L Lᵀ
        let l = DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.2, 0.1]);
        let c = &l * l.transpose();
        let e = covariance_ellipse(&c, [0.5, -0.2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 10_000;
        let inside = (0..n)
            .filter(|_| {
                let z: [f64; 2] = [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)];
                let x = [0.5 + l[(0, 0)] * z[0], -0.2 + l[(1, 0)] * z[0] + l[(1, 1)] * z[1]];
                e.contains(x)
            })
            .count();
        assert!((inside as f64 / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn outline_lies_on_the_level_set() {
        let k = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let e = ellipse_from_quadratic_form(&k, [0.1, 0.2]).unwrap();
        for (x, y) in e.outline(16) {
            let d = [x - 0.1, y - 0.2];
            let q = 3.0 * d[0] * d[0] + 2.0 * d[0] * d[1] + 2.0 * d[1] * d[1];
            assert!((q - HALF_MASS_LEVEL).abs() < 1e-12);
        }
    }
}
