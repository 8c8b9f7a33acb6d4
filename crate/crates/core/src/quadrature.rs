//! Adaptive Simpson quadrature and Gauss–Legendre rules.

use crate::error::{Error, Result};

/// Default cap on the number of Simpson panels evaluated by one integral.
pub const PANEL_BUDGET: usize = 1_000_000;

/// Tolerance and budget for [`adaptive_simpson`].
#[derive(Debug, Clone, Copy)]
pub struct SimpsonOptions {
    /// Relative tolerance with respect to the magnitude of the integral.
    pub rel_tol: f64,
    /// Absolute floor added to the relative target.
    pub abs_tol: f64,
    /// Number of uniform panels the interval is split into before refinement.
    pub initial_panels: usize,
    /// Maximum number of panels accepted before giving up.
    pub panel_budget: usize,
}

impl Default for SimpsonOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            initial_panels: 16,
            panel_budget: PANEL_BUDGET,
        }
    }
}

impl SimpsonOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

struct Panel<const K: usize> {
    a: f64,
    b: f64,
    fa: [f64; K],
    fm: [f64; K],
    fb: [f64; K],
    whole: [f64; K],
    depth: u32,
}

fn simpson<const K: usize>(h: f64, fa: &[f64; K], fm: &[f64; K], fb: &[f64; K]) -> [f64; K] {
    let mut out = [0.0; K];
    for k in 0..K {
        out[k] = h / 6.0 * (fa[k] + 4.0 * fm[k] + fb[k]);
    }
    out
}

fn max_abs<const K: usize>(v: &[f64; K]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Adaptive Simpson integration of a vector-valued integrand over `[a, b]`.
///
/// The interval is first split into `initial_panels` uniform panels so that
/// narrow peaks are not missed; each panel is then bisected until the
/// Richardson error estimate meets its share of the tolerance.
pub fn adaptive_simpson_vec<const K: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    opts: &SimpsonOptions,
) -> Result<[f64; K]>
where
    F: FnMut(f64) -> [f64; K],
{
    if a == b {
        return Ok([0.0; K]);
    }
    let n0 = opts.initial_panels.max(1);
    let width = b - a;
    let mut xs = Vec::with_capacity(2 * n0 + 1);
    for i in 0..=2 * n0 {
        xs.push(a + width * i as f64 / (2 * n0) as f64);
    }
    let fs: Vec<[f64; K]> = xs.iter().map(|&x| f(x)).collect();

    let mut stack: Vec<Panel<K>> = Vec::with_capacity(n0);
    let mut coarse = [0.0; K];
    for i in 0..n0 {
        let (pa, pb) = (xs[2 * i], xs[2 * i + 2]);
        let whole = simpson(pb - pa, &fs[2 * i], &fs[2 * i + 1], &fs[2 * i + 2]);
        for k in 0..K {
            coarse[k] += whole[k];
        }
        stack.push(Panel {
            a: pa,
            b: pb,
            fa: fs[2 * i],
            fm: fs[2 * i + 1],
            fb: fs[2 * i + 2],
            whole,
            depth: 0,
        });
    }

    // The tolerance follows the running estimate of the integral, so a peak
    // missed by the initial grid raises the target once it is resolved.
    // Every panel gets a share proportional to its width.
    let mut estimate = coarse;
    let mut total = [0.0; K];
    let mut panels = n0;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(m - p.a, &p.fa, &flm, &p.fm);
        let right = simpson(p.b - m, &p.fm, &frm, &p.fb);
        let mut err = [0.0; K];
        for k in 0..K {
            err[k] = left[k] + right[k] - p.whole[k];
        }
        for k in 0..K {
            estimate[k] += err[k];
        }
        let target = (opts.rel_tol * max_abs(&estimate)).max(opts.abs_tol);
        let share = target * (p.b - p.a) / width;
        let converged = max_abs(&err) <= 15.0 * share || p.depth >= 60;
        if converged || (m - p.a) <= f64::EPSILON * m.abs().max(1.0) {
            for k in 0..K {
                total[k] += left[k] + right[k] + err[k] / 15.0;
            }
            continue;
        }
        panels += 1;
        if panels > opts.panel_budget {
            return Err(Error::QuadratureFailure {
                tolerance: opts.rel_tol,
                budget: opts.panel_budget,
            });
        }
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            depth: p.depth + 1,
        });
    }
    Ok(total)
}

/// Scalar adaptive Simpson integration over `[a, b]`.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, opts: &SimpsonOptions) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    adaptive_simpson_vec::<1, _>(|x| [f(x)], a, b, opts).map(|v| v[0])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_polynomials_and_exponentials() {
        let opts = SimpsonOptions::with_rel_tol(1e-12);
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, &opts).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let v = adaptive_simpson(|x| (-x).exp(), 0.0, 10.0, &opts).unwrap();
        assert!((v - (1.0 - (-10.0f64).exp())).abs() < 1e-11);
    }

    #[test]
    fn simpson_finds_narrow_peak() {
        let opts = SimpsonOptions::with_rel_tol(1e-10);
        let s = 1e-3;
        let v = adaptive_simpson(|x| (-(x - 0.3f64).powi(2) / (2.0 * s * s)).exp(), 0.0, 1.0, &opts).unwrap();
        let exact = s * (2.0 * std::f64::consts::PI).sqrt();
        assert!((v / exact - 1.0).abs() < 1e-8);
    }

    #[test]
    fn vector_integrand_shares_evaluations() {
        let opts = SimpsonOptions::with_rel_tol(1e-12);
        let v = adaptive_simpson_vec(|x| [1.0, x, x * x], 0.0, 1.0, &opts).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-14);
        assert!((v[1] - 0.5).abs() < 1e-14);
        assert!((v[2] - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = SimpsonOptions {
            rel_tol: 1e-15,
            panel_budget: 20,
            ..Default::default()
        };
        let r = adaptive_simpson(|x| (50.0 * x).sin().abs(), 0.0, 1.0, &opts);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        for n in 1..12 {
            let (x, w) = gauss_legendre_on(n, -0.5, 2.0);
            let deg = 2 * n - 1;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = (2.0f64.powi(deg as i32 + 1) - (-0.5f64).powi(deg as i32 + 1)) / (deg as f64 + 1.0);
            assert!((q - exact).abs() < 1e-11 * exact.abs().max(1.0), "n={n}");
        }
    }
}
