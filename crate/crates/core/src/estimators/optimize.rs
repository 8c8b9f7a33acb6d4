//! Box-constrained minimization for the likelihood and least-squares fits.
//!
//! Both objectives have a natural curvature matrix (Fisher scoring for the
//! Poisson likelihood, Gauss–Newton for least squares). Each iteration solves
//! the damped curvature system on the free variables, projects the step onto
//! the box and backtracks until the Armijo condition holds. Several starts
//! are run and the result is checked against random feasible probes.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::{BoxDomain, SignalModel};

/// Multi-start and stopping controls.
#[derive(Debug, Clone)]
pub struct OptimizerOptions {
    /// Random starts in addition to the box centre.
    pub starts: usize,
    /// Random feasible points the result must not be beaten by.
    pub probes: usize,
    pub max_iterations: usize,
    /// Stop once the projected-gradient norm falls below this, relative to
    /// `1 + |objective|`.
    pub gradient_tol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Seed of the start and probe generator.
    pub seed: u64,
    /// Additional deterministic starting points.
    pub extra_starts: Vec<Vec<f64>>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            starts: 20,
            probes: 100,
            max_iterations: 5000,
            gradient_tol: 1e-10,
            armijo: 1e-4,
            seed: 0,
            extra_starts: Vec::new(),
        }
    }
}

/// Objective with gradient and a positive semi-definite curvature model.
pub trait Objective {
    fn value(&self, theta: &[f64]) -> Result<f64>;

    fn gradient_and_curvature(&self, theta: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)>;
}

/// Negative Poisson log-likelihood `Σ S_i − y_i ln S_i`.
pub struct PoissonNll<'a, M: SignalModel + ?Sized> {
    pub model: &'a M,
    pub counts: &'a [f64],
}

impl<M: SignalModel + ?Sized> Objective for PoissonNll<'_, M> {
    fn value(&self, theta: &[f64]) -> Result<f64> {
        let s = self.model.signal(theta)?;
        Ok(poisson_nll(&s, self.counts))
    }

    fn gradient_and_curvature(&self, theta: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let s = self.model.signal(theta)?;
        let jac = self.model.jacobian(theta)?;
        let n = theta.len();
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for i in 0..s.len() {
            let row = jac.row(i);
            if s[i] > 0.0 {
                let w = 1.0 / s[i];
                let r = 1.0 - self.counts[i] * w;
                for mu in 0..n {
                    g[mu] += r * row[mu];
                    let a = w * row[mu];
                    for nu in mu..n {
                        h[(mu, nu)] += a * row[nu];
                    }
                }
            } else {
                for mu in 0..n {
                    g[mu] += row[mu];
                }
            }
        }
        fill_lower(&mut h);
        Ok((g, h))
    }
}

/// `Σ S_i − y_i ln S_i`; `+∞` where a component with counts has no signal.
pub fn poisson_nll(signal: &[f64], counts: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (s, y) in signal.iter().zip(counts) {
        if *y > 0.0 {
            if *s <= 0.0 {
                return f64::INFINITY;
            }
            acc += s - y * s.ln();
        } else {
            acc += s;
        }
    }
    acc
}

/// Squared residual `|Y − S(θ)|²`.
pub struct LeastSquares<'a, M: SignalModel + ?Sized> {
    pub model: &'a M,
    pub counts: &'a [f64],
}

impl<M: SignalModel + ?Sized> Objective for LeastSquares<'_, M> {
    fn value(&self, theta: &[f64]) -> Result<f64> {
        let s = self.model.signal(theta)?;
        Ok(s.iter().zip(self.counts).map(|(s, y)| (y - s) * (y - s)).sum())
    }

    fn gradient_and_curvature(&self, theta: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let s = self.model.signal(theta)?;
        let jac = self.model.jacobian(theta)?;
        let r = DVector::from_iterator(s.len(), s.iter().zip(self.counts).map(|(s, y)| s - y));
        let g = 2.0 * jac.tr_mul(&r);
        let h = 2.0 * jac.tr_mul(&jac);
        Ok((g, h))
    }
}

fn fill_lower(h: &mut DMatrix<f64>) {
    for mu in 0..h.nrows() {
        for nu in 0..mu {
            h[(mu, nu)] = h[(nu, mu)];
        }
    }
}

fn project(domain: &BoxDomain, theta: &mut [f64]) {
    domain.project(theta);
}

fn projected_gradient_norm(domain: &BoxDomain, theta: &[f64], g: &DVector<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for k in 0..theta.len() {
        let moved = (theta[k] - g[k]).clamp(domain.lower[k], domain.upper[k]);
        worst = worst.max((moved - theta[k]).abs());
    }
    worst
}

/// Free variables: not on a bound that the gradient pushes against.
fn free_set(domain: &BoxDomain, theta: &[f64], g: &DVector<f64>) -> Vec<usize> {
    (0..theta.len())
        .filter(|&k| {
            let at_lo = theta[k] <= domain.lower[k] && g[k] > 0.0;
            let at_hi = theta[k] >= domain.upper[k] && g[k] < 0.0;
            !(at_lo || at_hi)
        })
        .collect()
}

/// Damped Newton-type direction on the free variables.
fn direction(g: &DVector<f64>, h: &DMatrix<f64>, free: &[usize], damping: f64) -> Option<DVector<f64>> {
    let nf = free.len();
    if nf == 0 {
        return None;
    }
    let scale = free.iter().map(|&k| h[(k, k)]).fold(0.0_f64, f64::max).max(1e-300);
    let mut a = DMatrix::from_fn(nf, nf, |i, j| h[(free[i], free[j])]);
    for i in 0..nf {
        a[(i, i)] += damping * scale;
    }
    let rhs = DVector::from_iterator(nf, free.iter().map(|&k| -g[k]));
    let step = a.cholesky()?.solve(&rhs);
    let mut p = DVector::zeros(g.len());
    for (i, &k) in free.iter().enumerate() {
        p[k] = step[i];
    }
    Some(p)
}

/// Armijo backtracking along the projected path `P(θ + αp)`.
fn line_search<O: Objective + ?Sized>(
    obj: &O,
    domain: &BoxDomain,
    theta: &[f64],
    f0: f64,
    g: &DVector<f64>,
    p: &DVector<f64>,
    c: f64,
) -> Result<Option<(Vec<f64>, f64, usize)>> {
    let mut alpha = 1.0;
    for halvings in 0..60 {
        let mut trial: Vec<f64> = theta.iter().zip(p.iter()).map(|(t, d)| t + alpha * d).collect();
        project(domain, &mut trial);
        let moved: f64 = trial.iter().zip(theta).zip(g.iter()).map(|((a, b), gk)| gk * (a - b)).sum();
        if moved >= 0.0 && trial.iter().zip(theta).all(|(a, b)| a == b) {
            return Ok(None);
        }
        let f1 = obj.value(&trial)?;
        if f1.is_finite() && f1 <= f0 + c * moved && moved < 0.0 {
            return Ok(Some((trial, f1, halvings)));
        }
        alpha *= 0.5;
    }
    Ok(None)
}

/// Local minimization from one start; returns the point and its objective.
pub fn minimize_from<O: Objective + ?Sized>(
    obj: &O,
    domain: &BoxDomain,
    start: &[f64],
    opts: &OptimizerOptions,
) -> Result<(Vec<f64>, f64)> {
    let mut theta = start.to_vec();
    project(domain, &mut theta);
    let mut f = obj.value(&theta)?;
    let mut damping = 1e-8;
    for _ in 0..opts.max_iterations {
        let (g, h) = obj.gradient_and_curvature(&theta)?;
        if projected_gradient_norm(domain, &theta, &g) <= opts.gradient_tol * (1.0 + f.abs()) {
            break;
        }
        let free = free_set(domain, &theta, &g);
        let mut accepted = None;
        if let Some(p) = direction(&g, &h, &free, damping) {
            accepted = line_search(obj, domain, &theta, f, &g, &p, opts.armijo)?;
        }
        if accepted.is_none() {
            // fall back to steepest descent scaled by the curvature
            let scale = (0..g.len()).map(|k| h[(k, k)]).fold(0.0_f64, f64::max);
            let p = if scale > 0.0 { -&g / scale } else { -&g };
            accepted = line_search(obj, domain, &theta, f, &g, &p, opts.armijo)?;
            damping = (damping * 100.0).min(1e6);
        }
        let Some((next, f_next, halvings)) = accepted else {
            break;
        };
        damping = if halvings == 0 {
            (damping * 0.1).max(1e-14)
        } else {
            (damping * 10.0).min(1e6)
        };
        let step = next.iter().zip(&theta).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let gain = f - f_next;
        theta = next;
        f = f_next;
        if step <= 1e-14 * (1.0 + theta.iter().fold(0.0_f64, |m, t| m.max(t.abs())))
            || gain <= 1e-16 * (1.0 + f.abs())
        {
            break;
        }
    }
    Ok((theta, f))
}

/// Random point of the box; infinite sides are replaced by a span of 2.
pub fn random_point(domain: &BoxDomain, rng: &mut impl Rng) -> Vec<f64> {
    (0..domain.dim())
        .map(|k| {
            let (lo, hi) = (domain.lower[k], domain.upper[k]);
            let (lo, hi) = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => (lo, hi),
                (true, false) => (lo, lo + 2.0),
                (false, true) => (hi - 2.0, hi),
                (false, false) => (-1.0, 1.0),
            };
            lo + (hi - lo) * rng.random::<f64>()
        })
        .collect()
}

/// Centre of the box, with the same convention for infinite sides as
/// [`random_point`].
pub fn box_center(domain: &BoxDomain) -> Vec<f64> {
    (0..domain.dim())
        .map(|k| {
            let (lo, hi) = (domain.lower[k], domain.upper[k]);
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo + 1.0,
                (false, true) => hi - 1.0,
                (false, false) => 0.0,
            }
        })
        .collect()
}

/// Multi-start minimization followed by the random-probe check.
pub fn minimize_multistart<O: Objective + ?Sized>(
    obj: &O,
    domain: &BoxDomain,
    opts: &OptimizerOptions,
) -> Result<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![box_center(domain)];
    starts.extend(opts.extra_starts.iter().cloned());
    for _ in 0..opts.starts {
        starts.push(random_point(domain, &mut rng));
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in &starts {
        let (x, fx) = minimize_from(obj, domain, s, opts)?;
        if best.as_ref().is_none_or(|(_, fb)| fx < *fb) {
            best = Some((x, fx));
        }
    }
    let (x, fx) = best.expect("at least the centre start");
    let slack = 1e-9 * (1.0 + fx.abs());
    for _ in 0..opts.probes {
        let p = random_point(domain, &mut rng);
        let fp = obj.value(&p)?;
        if fp < fx - slack {
            return Err(Error::OptimizerFailure(format!(
                "random probe reached {fp:e}, below the optimum {fx:e}"
            )));
        }
    }
    Ok((x, fx))
}
