//! Finite-correlation biphoton imaging with the full coincidence matrix.
//!
//! The two-photon amplitude at detectors `(x_i, x_j)` is
//!
//! ```text
//! Ψ_ij = Σ_{m,l} A_m A_l D^(ij)_{ml},
//! D^(ij)_{ml} = ∫_m ds₁ ∫_l ds₂ g(s₁ − s₂) h(s₁, x_i) h(s₂, x_j),
//! ```
//!
//! with `h(s, x) = 2k·sinc(k(s − x))` and `g` a normalized Gaussian of width
//! `σ_c`. Coincidences are `S_ij = N'·Ψ_ij²` for every unordered detector
//! pair `i ≤ j`.
//!
//! Inside every pixel `h` is replaced by its polynomial interpolant on
//! Gauss–Legendre nodes. The pixel-pair integrals of the Lagrange basis then
//! depend on the pixel offset only and are computed once per offset.

use nalgebra::DMatrix;

use super::{sinc, BiphotonG2Spec};
use crate::error::Result;
use crate::quadrature::{gauss_legendre, gauss_legendre_on};

/// Gaussian support used for the correlation factor, in units of `σ_c`.
const GAUSS_CUTOFF: f64 = 10.0;

/// Lagrange basis on Gauss–Legendre nodes of the reference interval `[-1, 1]`.
struct Basis {
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl Basis {
    fn new(q: usize) -> Self {
        let (nodes, _) = gauss_legendre(q);
        let bary = (0..q)
            .map(|a| {
                let p: f64 = (0..q).filter(|&c| c != a).map(|c| nodes[a] - nodes[c]).product();
                1.0 / p
            })
            .collect();
        Self { nodes, bary }
    }

    /// All basis polynomials at reference coordinate `xi`.
    fn eval(&self, xi: f64, out: &mut [f64]) {
        if let Some(a) = self.nodes.iter().position(|&t| t == xi) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[a] = 1.0;
            return;
        }
        let mut denom = 0.0;
        for (a, v) in out.iter_mut().enumerate() {
            *v = self.bary[a] / (xi - self.nodes[a]);
            denom += *v;
        }
        out.iter_mut().for_each(|v| *v /= denom);
    }
}

/// Coefficient table for a [`BiphotonG2Spec`].
#[derive(Debug, Clone)]
pub struct G2Coefficients {
    /// Detector positions.
    pub detectors: Vec<f64>,
    /// Count scale `N'` such that a fully transparent object yields `N`
    /// coincidences in total.
    pub scale: f64,
    pixels: usize,
    q: usize,
    /// `h(s_{m,a}, x_i)`, detectors × (pixel, node).
    h: DMatrix<f64>,
    /// Basis overlap kernels for pixel offsets `0..M`; `None` where the
    /// correlation factor vanishes to double precision.
    kernels: Vec<Option<DMatrix<f64>>>,
    /// `K^{(l−m)} H_lᵀ` at index `m·pixels + l`, `q × detectors`.
    blocks: Vec<Option<DMatrix<f64>>>,
}

impl G2Coefficients {
    pub fn pixels(&self) -> usize {
        self.pixels
    }

    /// Number of unordered detector pairs.
    pub fn signal_dim(&self) -> usize {
        let n = self.detectors.len();
        n * (n + 1) / 2
    }

    /// Detector pair `(i, j)` of signal component `k`, row-major over `i ≤ j`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.detectors.len();
        let mut out = Vec::with_capacity(self.signal_dim());
        for i in 0..n {
            for j in i..n {
                out.push((i, j));
            }
        }
        out
    }

    /// Basis kernel for pixel offset `l − m`, entry `(a, b)`.
    fn kernel(&self, offset: i64, a: usize, b: usize) -> f64 {
        match &self.kernels[offset.unsigned_abs() as usize] {
            None => 0.0,
            Some(k) if offset >= 0 => k[(a, b)],
            Some(k) => k[(b, a)],
        }
    }

    /// `D^(ij)_{ml}`.
    pub fn get(&self, i: usize, j: usize, m: usize, l: usize) -> f64 {
        // evaluate in a canonical order so that the swap symmetry is exact
        let (i, j, m, l) = if (i, m) <= (j, l) { (i, j, m, l) } else { (j, i, l, m) };
        let q = self.q;
        let off = l as i64 - m as i64;
        let mut acc = 0.0;
        for a in 0..q {
            let hi = self.h[(i, m * q + a)];
            let mut inner = 0.0;
            for b in 0..q {
                inner += self.kernel(off, a, b) * self.h[(j, l * q + b)];
            }
            acc += hi * inner;
        }
        acc
    }

    /// `R_m = Σ_l A_l K^{(l−m)} H_lᵀ` for every pixel, each `q × detectors`.
    /// `R_m = Σ_l A_l K^{(l−m)} H_lᵀ` stacked over pixels, `(pixels·q) × detectors`.
    fn reduced(&self, theta: &[f64]) -> DMatrix<f64> {
        let (q, nd, n) = (self.q, self.detectors.len(), self.pixels);
        let mut r = DMatrix::zeros(n * q, nd);
        for m in 0..n {
            let mut rm = r.rows_mut(m * q, q);
            for (l, t) in theta.iter().enumerate() {
                if let (Some(g), true) = (&self.blocks[m * n + l], *t != 0.0) {
                    rm.iter_mut().zip(g.iter()).for_each(|(a, b)| *a += t * b);
                }
            }
        }
        r
    }

    /// `Σ_m w_m H_m R_m` as a single product.
    fn amplitude(&self, w: &[f64], reduced: &DMatrix<f64>) -> DMatrix<f64> {
        let mut scaled = reduced.clone();
        for (m, wm) in w.iter().enumerate() {
            scaled.rows_mut(m * self.q, self.q).scale_mut(*wm);
        }
        &self.h * scaled
    }

    /// Two-photon amplitude matrix `Ψ_ij`.
    pub fn amplitude_matrix(&self, theta: &[f64]) -> DMatrix<f64> {
        self.amplitude(theta, &self.reduced(theta))
    }

    pub fn signal(&self, theta: &[f64]) -> Vec<f64> {
        let psi = self.amplitude_matrix(theta);
        self.pairs()
            .into_iter()
            .map(|(i, j)| {
                let v = 0.5 * (psi[(i, j)] + psi[(j, i)]);
                self.scale * v * v
            })
            .collect()
    }

    pub fn jacobian(&self, theta: &[f64]) -> DMatrix<f64> {
        let q = self.q;
        let reduced = self.reduced(theta);
        let psi = self.amplitude(theta, &reduced);
        let pairs = self.pairs();
        let mut jac = DMatrix::zeros(pairs.len(), self.pixels);
        for m in 0..self.pixels {
            // ∂Ψ/∂A_m = P + Pᵀ with P = H_m R_m
            let p = self.h.columns(m * q, q) * reduced.rows(m * q, q);
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let v = 0.5 * (psi[(i, j)] + psi[(j, i)]);
                jac[(k, m)] = 2.0 * self.scale * v * (p[(i, j)] + p[(j, i)]);
            }
        }
        jac
    }

    /// `S(θ)` and `∂S/∂θ · v` without the full Jacobian. `Ψ` is bilinear in
    /// `θ` and `∂Ψ·v = P + Pᵀ` with `P = Σ_m v_m H_m R_m`.
    pub fn signal_and_derivative(&self, theta: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let reduced = self.reduced(theta);
        let psi = self.amplitude(theta, &reduced);
        let p = self.amplitude(v, &reduced);
        self.pairs()
            .into_iter()
            .map(|(i, j)| {
                let s = 0.5 * (psi[(i, j)] + psi[(j, i)]);
                (self.scale * s * s, 2.0 * self.scale * s * (p[(i, j)] + p[(j, i)]))
            })
            .unzip()
    }
}

/// Build the coefficient table of a validated spec.
pub fn biphoton_g2_coeffs(spec: &BiphotonG2Spec) -> Result<G2Coefficients> {
    super::ModelSpec::BiphotonG2(spec.clone()).validate()?;
    let k = spec.k_max();
    let d = spec.d;
    let q = (8 + (3.0 * k * d).ceil() as usize).min(48);
    let basis = Basis::new(q);
    let detectors = spec.grid.positions(spec.pixels, d, spec.d_r);

    let (ref_nodes, _) = gauss_legendre(q);
    let mut h = DMatrix::zeros(detectors.len(), spec.pixels * q);
    for m in 0..spec.pixels {
        for (a, xi) in ref_nodes.iter().enumerate() {
            let s = (m as f64 + 0.5 * (xi + 1.0)) * d;
            for (i, x) in detectors.iter().enumerate() {
                h[(i, m * q + a)] = 2.0 * k * sinc(k * (s - x));
            }
        }
    }

    let kernels: Vec<Option<DMatrix<f64>>> = (0..spec.pixels)
        .map(|o| offset_kernel(&basis, q, d, spec.sigma_c, o))
        .collect();

    let n = spec.pixels;
    let blocks = (0..n * n)
        .map(|ml| {
            let (m, l) = (ml / n, ml % n);
            let off = l as i64 - m as i64;
            let k = &kernels[off.unsigned_abs() as usize];
            let hl = h.columns(l * q, q);
            k.as_ref()
                .map(|k| if off >= 0 { k * hl.transpose() } else { k.transpose() * hl.transpose() })
        })
        .collect();
    let mut table = G2Coefficients {
        detectors,
        scale: 1.0,
        pixels: spec.pixels,
        q,
        h,
        kernels,
        blocks,
    };
    let total: f64 = table.signal(&vec![1.0; spec.pixels]).iter().sum();
    table.scale = spec.n_mean / total;
    Ok(table)
}

/// `K^{(o)}_ab = ∫_{-d}^{d} g(τ − o·d) φ_ab(τ) dτ` with
/// `φ_ab(τ) = ∫ L_a(u + τ) L_b(u) du` over the overlap of the two pixels.
fn offset_kernel(basis: &Basis, q: usize, d: f64, sigma: f64, o: usize) -> Option<DMatrix<f64>> {
    let centre = o as f64 * d;
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
    let window = (centre - GAUSS_CUTOFF * sigma, centre + GAUSS_CUTOFF * sigma);
    let chunk = (0.5 * sigma).min(0.25 * d);
    let ng = 2 * q + 8;
    let mut out = DMatrix::zeros(q, q);
    let mut touched = false;
    let mut la = vec![0.0; q];
    let mut lb = vec![0.0; q];
    // φ is a different polynomial on each side of τ = 0
    for (lo, hi) in [(-d, 0.0), (0.0, d)] {
        let (a, b) = (lo.max(window.0), hi.min(window.1));
        if b <= a {
            continue;
        }
        touched = true;
        let pieces = ((b - a) / chunk).ceil().max(1.0) as usize;
        let width = (b - a) / pieces as f64;
        for p in 0..pieces {
            let (ta, tb) = (a + p as f64 * width, a + (p + 1) as f64 * width);
            let (taus, tws) = gauss_legendre_on(ng, ta, tb);
            for (tau, tw) in taus.iter().zip(&tws) {
                let t = tau - centre;
                let weight = tw * norm * (-0.5 * t * t / (sigma * sigma)).exp();
                if weight == 0.0 {
                    continue;
                }
                let (ua, ub) = ((-tau).max(0.0), (d - tau).min(d));
                if ub <= ua {
                    continue;
                }
                let (us, uws) = gauss_legendre_on(q, ua, ub);
                for (u, uw) in us.iter().zip(&uws) {
                    basis.eval(2.0 * (u + tau) / d - 1.0, &mut la);
                    basis.eval(2.0 * u / d - 1.0, &mut lb);
                    let w = weight * uw;
                    for x in 0..q {
                        let lx = w * la[x];
                        for y in 0..q {
                            out[(x, y)] += lx * lb[y];
                        }
                    }
                }
            }
        }
    }
    if !touched {
        return None;
    }
    if o == 0 {
        out = crate::linalg::symmetrize(out);
    }
    Some(out)
}
