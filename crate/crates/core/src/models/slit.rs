//! Ideal-correlation slit array: diagonal coincidences `S_j = N'·(Σ_m D_jm A_m²)²`.

use nalgebra::DMatrix;

use super::SlitArraySpec;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, SimpsonOptions};

/// Unnormalized sinc, `sin(x)/x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `4k²·∫ sinc²(k(s − x)) ds` over pixel `m` (zero based, `[m·d, (m+1)·d]`)
/// for a detector at position `x`.
pub fn slit_kernel_coeff_at(m: usize, x: f64, spec: &SlitArraySpec) -> Result<f64> {
    if m >= spec.pixels {
        return Err(Error::DimensionMismatch {
            expected: spec.pixels,
            got: m,
        });
    }
    pixel_integral(m as f64 * spec.d, (m + 1) as f64 * spec.d, x, spec.k_max())
}

/// Coefficient for pixel `m` and detector index `j`, located at `x_j = j·d/2`.
pub fn slit_kernel_coeff(m: usize, j: i64, spec: &SlitArraySpec) -> Result<f64> {
    slit_kernel_coeff_at(m, j as f64 * spec.d * 0.5, spec)
}

pub(crate) fn pixel_integral(a: f64, b: f64, x: f64, k: f64) -> Result<f64> {
    let opts = SimpsonOptions {
        // a few panels per sinc lobe
        initial_panels: (((b - a) * k).ceil() as usize * 2).clamp(16, 4096),
        ..SimpsonOptions::with_rel_tol(1e-10)
    };
    let v = adaptive_simpson(
        |s| {
            let c = sinc(k * (s - x));
            c * c
        },
        a,
        b,
        &opts,
    )?;
    Ok(4.0 * k * k * v)
}

/// Precomputed coefficients of a [`SlitArraySpec`].
#[derive(Debug, Clone)]
pub struct SlitTable {
    /// Detector positions.
    pub detectors: Vec<f64>,
    /// `D_jm`, detectors × pixels.
    pub coeffs: DMatrix<f64>,
    /// Count scale `N'` such that a fully transparent object yields `N`
    /// coincidences in total.
    pub scale: f64,
}

impl SlitTable {
    pub fn new(spec: &SlitArraySpec) -> Result<Self> {
        let detectors = spec.grid.positions(spec.pixels, spec.d, spec.d_r);
        let mut coeffs = DMatrix::zeros(detectors.len(), spec.pixels);
        for (j, &x) in detectors.iter().enumerate() {
            for m in 0..spec.pixels {
                coeffs[(j, m)] = slit_kernel_coeff_at(m, x, spec)?;
            }
        }
        let total: f64 = coeffs.row_iter().map(|r| r.sum().powi(2)).sum();
        Ok(Self {
            detectors,
            coeffs,
            scale: spec.n_mean / total,
        })
    }

    fn intensities(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.coeffs.nrows())
            .map(|j| {
                (0..self.coeffs.ncols())
                    .map(|m| self.coeffs[(j, m)] * theta[m] * theta[m])
                    .sum()
            })
            .collect()
    }

    pub fn signal(&self, theta: &[f64]) -> Vec<f64> {
        self.intensities(theta)
            .into_iter()
            .map(|u| self.scale * u * u)
            .collect()
    }

    pub fn jacobian(&self, theta: &[f64]) -> DMatrix<f64> {
        let u = self.intensities(theta);
        DMatrix::from_fn(self.coeffs.nrows(), self.coeffs.ncols(), |j, m| {
            4.0 * self.scale * u[j] * self.coeffs[(j, m)] * theta[m]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::DetectorGrid;

    fn spec(d: f64, pixels: usize) -> SlitArraySpec {
        SlitArraySpec {
            n_mean: 1e4,
            pixels,
            d,
            d_r: 1.0,
            grid: DetectorGrid::default(),
        }
    }

    // plain trapezoid rule with a fixed panel count
    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut acc = 0.5 * (f(a) + f(b));
        for i in 1..panels {
            acc += f(a + i as f64 * h);
        }
        acc * h
    }

    #[test]
    fn point_pixel_limit() {
        let d = 1e-3;
        let s = spec(d, 3);
        // detector j = 3 sits at 1.5·d, the centre of pixel 1
        let v = slit_kernel_coeff(1, 3, &s).unwrap();
        let k = s.k_max();
        assert!((v / (4.0 * k * k * d) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn mirror_symmetric_offsets() {
        let s = spec(0.5, 5);
        // detector at the centre of pixel 2 (x = 1.25, j = 5)
        for off in 1..=2 {
            let a = slit_kernel_coeff(2 + off, 5, &s).unwrap();
            let b = slit_kernel_coeff(2 - off, 5, &s).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
    }

    #[test]
    fn matches_high_resolution_trapezoid() {
        let s = spec(0.5, 4);
        let k = s.k_max();
        for (m, j) in [(1usize, 1i64), (1, 4), (0, 2), (3, 5)] {
            let x = j as f64 * s.d / 2.0;
            let v = slit_kernel_coeff(m, j, &s).unwrap();
            let oracle = 4.0
                * k
                * k
                * trapezoid(
                    |t| {
                        let c = if t == x { 1.0 } else { (k * (t - x)).sin() / (k * (t - x)) };
                        c * c
                    },
                    m as f64 * s.d,
                    (m + 1) as f64 * s.d,
                    1_000_000,
                );
            assert!((v / oracle - 1.0).abs() < 1e-8, "m={m} j={j}: {v} vs {oracle}");
        }
    }

    #[test]
    fn shift_covariance_by_one_pixel() {
        let s = spec(0.3, 12);
        for j in -4..10i64 {
            let x = j as f64 * s.d / 2.0;
            let base: f64 = (0..10).map(|m| slit_kernel_coeff_at(m, x, &s).unwrap()).sum::<f64>() * s.d;
            let shifted: f64 =
                (1..11).map(|m| slit_kernel_coeff_at(m, x + s.d, &s).unwrap()).sum::<f64>() * s.d;
            assert!((base - shifted).abs() <= 1e-9 * base.abs(), "j={j}");
        }
    }

    #[test]
    fn transparent_object_yields_total_count() {
        let s = spec(0.4, 6);
        let t = SlitTable::new(&s).unwrap();
        let total: f64 = t.signal(&[1.0; 6]).iter().sum();
        assert!((total - 1e4).abs() < 1e-8);
        // detector grid spans the support plus two Rayleigh lengths each side
        assert!(t.detectors[0] <= -2.0 + s.d / 2.0 && *t.detectors.last().unwrap() >= 6.0 * 0.4 + 2.0 - s.d / 2.0);
    }

    #[test]
    fn dark_pixel_has_zero_jacobian_column() {
        let t = SlitTable::new(&spec(0.5, 4)).unwrap();
        let j = t.jacobian(&[1.0, 0.0, 0.7, 0.2]);
        assert!(j.column(1).iter().all(|v| *v == 0.0));
    }
}
