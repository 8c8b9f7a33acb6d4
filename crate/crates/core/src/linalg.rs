//! Small dense symmetric-matrix helpers built on `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest one make a kernel singular.
pub const SINGULAR_RATIO: f64 = 1e-12;

/// Eigenvalues closer than this fraction of the spectral radius are treated
/// as one degenerate cluster when canonicalizing eigenvectors.
pub const DEGENERACY_RATIO: f64 = 1e-12;

/// Spectral decomposition with eigenvalues sorted ascending and eigenvectors
/// stored column-wise in the same order.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Eigen {
    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Reassemble `Σ f(λ_i) v_i v_iᵀ`.
    pub fn compose(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.values.len();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            let v = self.vectors.column(i);
            out += f(self.values[i]) * v * v.transpose();
        }
        symmetrize(out)
    }
}

/// Largest absolute asymmetry `|m_ij - m_ji|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Reject matrices whose asymmetry exceeds `rel_tol` times the largest entry.
pub fn check_symmetric(m: &DMatrix<f64>, rel_tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let scale = m.amax();
    let a = asymmetry(m);
    if a > rel_tol * scale {
        return Err(Error::NonSymmetric { asymmetry: a });
    }
    Ok(())
}

pub fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Symmetric eigendecomposition, ascending, with a deterministic sign for
/// every eigenvector (largest-magnitude component positive, lowest index on
/// ties).
pub fn sym_eigen(m: &DMatrix<f64>) -> Eigen {
    let n = m.nrows();
    let se = SymmetricEigen::new(symmetrize(m.clone()));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]).then(a.cmp(&b)));
    let values = DVector::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = se.eigenvectors.column(src).into_owned();
        fix_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    Eigen { values, vectors }
}

fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 0..v.len() {
        if v[i].abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if v[best] < 0.0 {
        *v *= -1.0;
    }
}

/// Like [`sym_eigen`], but every cluster of (numerically) degenerate
/// eigenvalues gets a basis built from the coordinate axes projected onto the
/// cluster's eigenspace, taken in order of decreasing projection length and
/// orthonormalized by Gram–Schmidt. An exactly decoupled parameter therefore
/// keeps its own coordinate axis as eigenvector.
pub fn sym_eigen_canonical(m: &DMatrix<f64>) -> Eigen {
    let mut eig = sym_eigen(m);
    let n = eig.values.len();
    let scale = eig.values.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    let tol = DEGENERACY_RATIO * scale.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eig.values[end] - eig.values[start]).abs() <= tol {
            end += 1;
        }
        if end - start > 1 {
            let cluster = eig.vectors.columns(start, end - start).into_owned();
            let projector = &cluster * cluster.transpose();
            let mut axes: Vec<(usize, f64)> =
                (0..n).map(|k| (k, projector[(k, k)])).collect();
            axes.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let mut basis: Vec<DVector<f64>> = Vec::with_capacity(end - start);
            for (k, _) in axes {
                if basis.len() == end - start {
                    break;
                }
                let mut v = projector.column(k).into_owned();
                for b in &basis {
                    let c = b.dot(&v);
                    v -= c * b;
                }
                let norm = v.norm();
                if norm > 1e-6 {
                    v /= norm;
                    fix_sign(&mut v);
                    basis.push(v);
                }
            }
            if basis.len() == end - start {
                for (i, v) in basis.iter().enumerate() {
                    eig.vectors.set_column(start + i, v);
                }
            }
        }
        start = end;
    }
    eig
}

/// Positive-definite square root and inverse square root.
pub fn sqrt_pair(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = sym_eigen(m);
    let (lo, hi) = (eig.min(), eig.max());
    if !(hi > 0.0) || lo < SINGULAR_RATIO * hi {
        return Err(Error::SingularKernel {
            min_eigenvalue: lo,
            max_eigenvalue: hi,
        });
    }
    Ok((eig.compose(f64::sqrt), eig.compose(|l| 1.0 / l.sqrt())))
}

/// Inverse of a positive-definite matrix through its spectrum.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = sym_eigen(m);
    let (lo, hi) = (eig.min(), eig.max());
    if !(hi > 0.0) || lo < SINGULAR_RATIO * hi {
        return Err(Error::SingularKernel {
            min_eigenvalue: lo,
            max_eigenvalue: hi,
        });
    }
    Ok(eig.compose(|l| 1.0 / l))
}
