//! Fisher information of Poisson-distributed signals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{check_symmetric, sym_eigen, symmetrize, SINGULAR_RATIO};
use crate::models::{default_labels, SignalModel};
use crate::special::ln_gamma;

/// Signals below this value are treated as dark.
pub const DARK_SIGNAL: f64 = 1e-30;

/// A dark component is consistent when `‖∇S_i‖² ≤ S_i · DARK_GRADIENT_RATIO`.
pub const DARK_GRADIENT_RATIO: f64 = 1e6;

/// Largest Poisson mean the brute-force oracle enumerates.
pub const BRUTEFORCE_MAX_MEAN: f64 = 1e4;

/// Symmetric Fisher information matrix with parameter labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    pub matrix: DMatrix<f64>,
    pub labels: Vec<String>,
}

impl FisherMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        let labels = default_labels(matrix.nrows());
        Self { matrix, labels }
    }

    pub fn with_labels(matrix: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: labels.len(),
            });
        }
        Ok(Self { matrix, labels })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Check symmetry (1e-12 relative) and positive semi-definiteness
    /// (eigenvalues ≥ −1e-10 × largest).
    pub fn validate(&self) -> Result<()> {
        check_symmetric(&self.matrix, 1e-12)?;
        let eig = sym_eigen(&self.matrix);
        let (lo, hi) = (eig.min(), eig.max());
        if lo < -1e-10 * hi.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::SingularFim {
                min_eigenvalue: lo,
                max_eigenvalue: hi,
            });
        }
        Ok(())
    }

    /// `Tr F⁻¹`, see [`total_variance`].
    pub fn total_variance(&self) -> Result<f64> {
        total_variance(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Serialize, Deserialize)]
struct FisherJson {
    dim: usize,
    labels: Vec<String>,
    data: Vec<f64>,
}

impl Serialize for FisherMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let data = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.matrix[(i, j)])
            .collect();
        FisherJson {
            dim: n,
            labels: self.labels.clone(),
            data,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FisherMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FisherJson::deserialize(d)?;
        if raw.data.len() != raw.dim * raw.dim || raw.labels.len() != raw.dim {
            return Err(serde::de::Error::custom("FisherMatrix: data/labels do not match dim"));
        }
        Ok(Self {
            matrix: DMatrix::from_row_slice(raw.dim, raw.dim, &raw.data),
            labels: raw.labels,
        })
    }
}

/// Decide whether component `i` may be skipped. Returns `Ok(true)` for a
/// consistent dark term.
fn dark_term(component: usize, signal: f64, grad2: f64) -> Result<bool> {
    if signal >= DARK_SIGNAL {
        return Ok(false);
    }
    if grad2 <= signal * DARK_GRADIENT_RATIO {
        Ok(true)
    } else {
        Err(Error::SingularTerm {
            component,
            signal,
            gradient_norm2: grad2,
        })
    }
}

fn weighted_outer<M: SignalModel + ?Sized>(
    model: &M,
    theta: &[f64],
    weight: impl Fn(usize, f64, f64) -> Result<Option<f64>>,
) -> Result<FisherMatrix> {
    let s = model.signal(theta)?;
    let jac = model.jacobian(theta)?;
    let n = theta.len();
    let mut f = DMatrix::zeros(n, n);
    for i in 0..s.len() {
        let row = jac.row(i);
        let grad2 = row.norm_squared();
        let Some(w) = weight(i, s[i], grad2)? else {
            continue;
        };
        for mu in 0..n {
            let a = w * row[mu];
            if a == 0.0 {
                continue;
            }
            for nu in mu..n {
                f[(mu, nu)] += a * row[nu];
            }
        }
    }
    for mu in 0..n {
        for nu in 0..mu {
            f[(mu, nu)] = f[(nu, mu)];
        }
    }
    Ok(FisherMatrix::new(f))
}

/// Poisson Fisher information `F_μν = Σ_i (1/S_i) ∂_μS_i ∂_νS_i`.
///
/// Components with `S_i < 1e-30` contribute nothing when their gradient is
/// correspondingly small and raise [`Error::SingularTerm`] otherwise.
pub fn fim_poisson<M: SignalModel + ?Sized>(model: &M, theta: &[f64]) -> Result<FisherMatrix> {
    weighted_outer(model, theta, |i, s, g2| {
        Ok(if dark_term(i, s, g2)? { None } else { Some(1.0 / s) })
    })
}

/// `vᵀF(θ)v = Σ_i (∂_vS_i)²/S_i` without forming `F`. Dark components are
/// judged by their derivative along `v`.
pub fn fim_poisson_along<M: SignalModel + ?Sized>(model: &M, theta: &[f64], v: &[f64]) -> Result<f64> {
    let (s, d) = model.signal_and_derivative(theta, v)?;
    let mut acc = 0.0;
    for (i, (&si, &di)) in s.means.iter().zip(&d).enumerate() {
        if !dark_term(i, si, di * di)? {
            acc += di * di / si;
        }
    }
    Ok(acc)
}

/// Fisher information of the continuous Gaussian approximation to the
/// Poisson law (mean and variance both `S_i`): weight `1/S + 1/(2S²)`.
pub fn fim_gaussian_noise<M: SignalModel + ?Sized>(model: &M, theta: &[f64]) -> Result<FisherMatrix> {
    weighted_outer(model, theta, |i, s, g2| {
        if s == 0.0 {
            return Err(Error::SingularTerm {
                component: i,
                signal: s,
                gradient_norm2: g2,
            });
        }
        Ok(Some(1.0 / s + 0.5 / (s * s)))
    })
}

/// `E[(y/S − 1)²]` for `y ~ Poisson(S)` by explicit summation over the
/// outcomes carrying all but `tail_mass` of the probability.
fn score_second_moment(mean: f64, tail_mass: f64) -> Result<f64> {
    if mean > BRUTEFORCE_MAX_MEAN {
        return Err(Error::TruncationBudgetExceeded { mean });
    }
    let ln_mean = mean.ln();
    let pmf = |y: f64| (y * ln_mean - mean - ln_gamma(y + 1.0)).exp();
    let term = |y: f64| {
        let r = y / mean - 1.0;
        pmf(y) * r * r
    };
    let mode = mean.floor();
    let budget = (40.0 * (mean.sqrt() + 10.0)) as usize;
    let mut mass = pmf(mode);
    let mut acc = term(mode);
    let (mut lo, mut hi) = (mode, mode);
    let mut steps = 0;
    while 1.0 - mass > tail_mass {
        steps += 1;
        if steps > budget {
            return Err(Error::TruncationBudgetExceeded { mean });
        }
        // extend toward the heavier neighbour
        let p_hi = pmf(hi + 1.0);
        let p_lo = if lo > 0.0 { pmf(lo - 1.0) } else { -1.0 };
        if p_hi >= p_lo {
            hi += 1.0;
            mass += p_hi;
            acc += term(hi);
        } else {
            lo -= 1.0;
            mass += p_lo;
            acc += term(lo);
        }
        if p_hi < 1e-300 && p_lo < 1e-300 {
            break;
        }
    }
    Ok(acc)
}

/// Independent Fisher information: `E[∂_μℓ ∂_νℓ]` by enumerating integer
/// outcomes of every component up to cumulative mass `1 − tail_mass`.
pub fn fim_bruteforce<M: SignalModel + ?Sized>(model: &M, theta: &[f64], tail_mass: f64) -> Result<FisherMatrix> {
    if !(tail_mass > 0.0 && tail_mass < 1.0) {
        return Err(Error::Domain(format!("tail_mass must lie in (0, 1), got {tail_mass}")));
    }
    weighted_outer(model, theta, |i, s, g2| {
        if dark_term(i, s, g2)? {
            return Ok(None);
        }
        if g2 == 0.0 {
            return Ok(None);
        }
        Ok(Some(score_second_moment(s, tail_mass)?))
    })
}

/// Trace of the inverse, `Σ_i 1/λ_i`.
///
/// Fails with [`Error::SingularFim`] when the smallest eigenvalue is not
/// above `1e-12` times the largest.
pub fn total_variance(f: &FisherMatrix) -> Result<f64> {
    let eig = sym_eigen(&symmetrize(f.matrix.clone()));
    let (lo, hi) = (eig.min(), eig.max());
    if !(hi > 0.0) || lo <= SINGULAR_RATIO * hi {
        return Err(Error::SingularFim {
            min_eigenvalue: lo,
            max_eigenvalue: hi,
        });
    }
    Ok(eig.values.iter().map(|l| 1.0 / l).sum())
}
