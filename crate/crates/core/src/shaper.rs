//! Constraint-aware correction of a Gaussian approximation.
//!
//! The likelihood around the estimate is approximated by a Gaussian
//! `exp(−½(θ − θ₀)ᵀF(θ − θ₀))`. Linear constraints `aᵀθ ≤ b` cut off part of
//! its mass. The correction repeatedly picks the most violated constraint,
//! narrows the Gaussian along its normal and moves the centre inward, so that
//! the violation probability drops while the variance inside the feasible
//! half-space is preserved. The final kernel serves as an effective Fisher
//! matrix of the constrained problem.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::FisherMatrix;
use crate::linalg::sqrt_pair;
use crate::special::{erfc, normal_upper_quantile, normal_upper_tail};

/// Violation probability below which a constraint counts as satisfied.
pub const STOP_THRESHOLD: f64 = 0.01;

/// Largest absolute reduction of the violation probability per step.
pub const STEP_ETA: f64 = 0.1;

/// Iteration cap of [`correct_fim`].
pub const ITERATION_BUDGET: usize = 10_000;

/// Half-space `aᵀθ ≤ b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub a: Vec<f64>,
    pub b: f64,
}

impl LinearConstraint {
    pub fn new(a: Vec<f64>, b: f64) -> Result<Self> {
        if a.iter().all(|v| *v == 0.0) || a.iter().any(|v| !v.is_finite()) || !b.is_finite() {
            return Err(Error::Domain("constraint normal must be finite and nonzero".into()));
        }
        Ok(Self { a, b })
    }

    /// `θ_i ≤ value`.
    pub fn upper(dim: usize, i: usize, value: f64) -> Self {
        let mut a = vec![0.0; dim];
        a[i] = 1.0;
        Self { a, b: value }
    }

    /// `θ_i ≥ value`.
    pub fn lower(dim: usize, i: usize, value: f64) -> Self {
        let mut a = vec![0.0; dim];
        a[i] = -1.0;
        Self { a, b: -value }
    }
}

/// Gaussian with centre `θ₀` and quadratic-form matrix `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianApprox {
    pub center: Vec<f64>,
    pub kernel: FisherMatrix,
}

/// Whitened view of a constraint: `d·θ' ≤ x0` with `|d| = 1`.
struct Whitened {
    /// Distance of the boundary from the centre in standard deviations.
    x0: f64,
    /// Unit normal in whitened coordinates.
    direction: DVector<f64>,
}

fn whiten(g: &GaussianApprox, t_inv: &nalgebra::DMatrix<f64>, c: &LinearConstraint) -> Result<Whitened> {
    let n = g.center.len();
    if c.a.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: c.a.len(),
        });
    }
    let a = DVector::from_column_slice(&c.a);
    let a_white = t_inv * &a;
    let norm = a_white.norm();
    let b_white = c.b - a.dot(&DVector::from_column_slice(&g.center));
    Ok(Whitened {
        x0: b_white / norm,
        direction: a_white / norm,
    })
}

fn check_dims(g: &GaussianApprox) -> Result<()> {
    if g.kernel.dim() != g.center.len() {
        return Err(Error::DimensionMismatch {
            expected: g.center.len(),
            got: g.kernel.dim(),
        });
    }
    Ok(())
}

/// Probability mass of `g` on the violating side of `c`,
/// `½·erfc(b′/(√2·|a′|))` in whitened coordinates.
pub fn violation_probability(g: &GaussianApprox, c: &LinearConstraint) -> Result<f64> {
    check_dims(g)?;
    let (_, t_inv) = sqrt_pair(&g.kernel.matrix)?;
    Ok(normal_upper_tail(whiten(g, &t_inv, c)?.x0))
}

/// Variance of a standard normal truncated to `x′ ≤ x`, where `p` is the
/// mass cut away:
/// `1 − x·e^{−x²/2}/(√(2π)(1−p)) − e^{−x²}/(2π(1−p)²)`.
pub fn truncated_variance_v(p: f64, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("truncated mass must lie in [0, 1), got {p}")));
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    let keep = 1.0 - p;
    let lambda = (-0.5 * x * x).exp() / ((2.0 * PI).sqrt() * keep);
    Ok(1.0 - x * lambda - lambda * lambda)
}

/// [`truncated_variance_v`] with the kept mass computed from `x` directly,
/// which stays accurate when almost everything is cut away.
fn truncated_variance_at(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    let keep = 0.5 * erfc(-x * FRAC_1_SQRT_2);
    let lambda = (-0.5 * x * x).exp() / ((2.0 * PI).sqrt() * keep);
    1.0 - lambda * (x + lambda)
}

/// One shrinking step, as recorded in a [`ShrinkReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Index of the constraint that was acted on.
    pub constraint: usize,
    /// Violation probability before the step.
    pub p_before: f64,
    /// Target violation probability.
    pub p_target: f64,
    /// Relative kernel increase along the constraint normal.
    pub xi: f64,
    /// Centre shift along the whitened normal, in standard deviations.
    pub delta: f64,
}

/// Outcome of [`correct_fim`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkReport {
    pub iterations: usize,
    pub final_violation_probs: Vec<f64>,
    pub steps: Vec<StepRecord>,
}

/// Target probability after one step: `max(P/2, P − η)`.
pub fn step_target(p: f64, eta: f64) -> f64 {
    (0.5 * p).max(p - eta)
}

/// Shrink `g` against the most violated constraint (smallest `b′/|a′|`,
/// lowest index on ties).
pub fn shrink_step(g: &GaussianApprox, constraints: &[LinearConstraint], eta: f64) -> Result<(GaussianApprox, StepRecord)> {
    if constraints.is_empty() {
        return Err(Error::NoConstraint);
    }
    check_dims(g)?;
    let (t, t_inv) = sqrt_pair(&g.kernel.matrix)?;
    let mut chosen: Option<(usize, Whitened)> = None;
    for (k, c) in constraints.iter().enumerate() {
        let w = whiten(g, &t_inv, c)?;
        if chosen.as_ref().is_none_or(|(_, best)| w.x0 < best.x0) {
            chosen = Some((k, w));
        }
    }
    let (j, w) = chosen.expect("at least one constraint");
    let p = normal_upper_tail(w.x0);
    let p_target = step_target(p, eta);
    let x_target = normal_upper_quantile(p_target);
    let xi = truncated_variance_at(x_target) / truncated_variance_at(w.x0) - 1.0;
    let delta = x_target / (1.0 + xi).sqrt() - w.x0;

    let td = &t * &w.direction;
    let kernel = &g.kernel.matrix + xi * &td * td.transpose();
    let shift = &t_inv * &w.direction * delta;
    let center = g.center.iter().zip(shift.iter()).map(|(c, s)| c - s).collect();
    let next = GaussianApprox {
        center,
        kernel: FisherMatrix::with_labels(crate::linalg::symmetrize(kernel), g.kernel.labels.clone())?,
    };
    Ok((
        next,
        StepRecord {
            constraint: j,
            p_before: p,
            p_target,
            xi,
            delta,
        },
    ))
}

/// Violation probabilities of all constraints.
pub fn violation_probabilities(g: &GaussianApprox, constraints: &[LinearConstraint]) -> Result<Vec<f64>> {
    check_dims(g)?;
    let (_, t_inv) = sqrt_pair(&g.kernel.matrix)?;
    constraints
        .iter()
        .map(|c| Ok(normal_upper_tail(whiten(g, &t_inv, c)?.x0)))
        .collect()
}

/// Shrink until every violation probability is at most
/// [`STOP_THRESHOLD`]; returns the corrected kernel, the shifted centre and
/// the step log.
pub fn correct_fim(
    f: &FisherMatrix,
    theta: &[f64],
    constraints: &[LinearConstraint],
) -> Result<(FisherMatrix, Vec<f64>, ShrinkReport)> {
    correct_fim_with(f, theta, constraints, STEP_ETA, STOP_THRESHOLD, ITERATION_BUDGET)
}

/// [`correct_fim`] with explicit step size, threshold and budget.
pub fn correct_fim_with(
    f: &FisherMatrix,
    theta: &[f64],
    constraints: &[LinearConstraint],
    eta: f64,
    threshold: f64,
    budget: usize,
) -> Result<(FisherMatrix, Vec<f64>, ShrinkReport)> {
    if constraints.is_empty() {
        return Err(Error::NoConstraint);
    }
    let mut g = GaussianApprox {
        center: theta.to_vec(),
        kernel: f.clone(),
    };
    let mut steps = Vec::new();
    loop {
        let probs = violation_probabilities(&g, constraints)?;
        let worst = probs.iter().cloned().fold(0.0, f64::max);
        if worst <= threshold {
            let report = ShrinkReport {
                iterations: steps.len(),
                final_violation_probs: probs,
                steps,
            };
            return Ok((g.kernel, g.center, report));
        }
        if steps.len() >= budget {
            return Err(Error::IterationBudgetExceeded {
                budget,
                max_violation: worst,
            });
        }
        let (next, record) = shrink_step(&g, constraints, eta)?;
        g = next;
        steps.push(record);
    }
}

/// Final probability reached by repeatedly applying [`step_target`] from
/// `p` until it is at most `threshold`.
pub fn scheduled_target(p: f64, eta: f64, threshold: f64) -> f64 {
    let mut q = p;
    while q > threshold {
        q = step_target(q, eta);
    }
    q
}

/// Closed-form correction of a scalar information `F` at `A` in
/// `[lower, upper]`.
///
/// With a single active constraint the shrinking steps act along the same
/// direction and their kernel factors telescope, so the result is
/// `(1 + ξ)F` with `ξ = V(P_target)/V(P) − 1`.
pub fn correct_fim_1d_closed(f: f64, a: f64, lower: f64, upper: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::SingularKernel {
            min_eigenvalue: f,
            max_eigenvalue: f,
        });
    }
    let s = f.sqrt();
    let x_up = s * (upper - a);
    let x_lo = s * (a - lower);
    let (p_up, p_lo) = (normal_upper_tail(x_up), normal_upper_tail(x_lo));
    if p_up > STOP_THRESHOLD && p_lo > STOP_THRESHOLD {
        return Err(Error::TwoActiveConstraints {
            p_lower: p_lo,
            p_upper: p_up,
        });
    }
    let x0 = if p_up > STOP_THRESHOLD {
        x_up
    } else if p_lo > STOP_THRESHOLD {
        x_lo
    } else {
        return Ok(f);
    };
    let p_target = scheduled_target(normal_upper_tail(x0), STEP_ETA, STOP_THRESHOLD);
    let xi = truncated_variance_at(normal_upper_quantile(p_target)) / truncated_variance_at(x0) - 1.0;
    Ok((1.0 + xi) * f)
}

/// Box constraints `lower ≤ θ ≤ upper` as half-spaces.
pub fn box_constraints(domain: &crate::models::BoxDomain) -> Vec<LinearConstraint> {
    domain.linear_constraints()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::{fim_poisson, total_variance};
    use crate::linalg::spd_inverse;
    use crate::models::{BoxDomain, Model, ModelSpec, TwoPixelSpec};
    use crate::quadrature::{adaptive_simpson, SimpsonOptions};
    use crate::special::{erf_inv, normal_pdf};
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss(center: Vec<f64>, f: DMatrix<f64>) -> GaussianApprox {
        GaussianApprox {
            center,
            kernel: FisherMatrix::new(f),
        }
    }

    // variance of a standard normal restricted to x' ≤ x, by quadrature
    fn truncated_variance_oracle(x: f64) -> f64 {
        let opts = SimpsonOptions::with_rel_tol(1e-13);
        let lo = -40.0;
        let m0 = adaptive_simpson(normal_pdf, lo, x, &opts).unwrap();
        let m1 = adaptive_simpson(|t| t * normal_pdf(t), lo, x, &opts).unwrap();
        let m2 = adaptive_simpson(|t| t * t * normal_pdf(t), lo, x, &opts).unwrap();
        m2 / m0 - (m1 / m0).powi(2)
    }

    #[test]
    fn violation_probability_examples() {
        let g = gauss(vec![0.0], DMatrix::from_element(1, 1, 1.0));
        let p = violation_probability(&g, &LinearConstraint::upper(1, 0, 0.0)).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let p = violation_probability(&g, &LinearConstraint::upper(1, 0, 1.6449)).unwrap();
        assert!((p - 0.05).abs() < 1e-5);
        let p = violation_probability(&g, &LinearConstraint::upper(1, 0, 60.0)).unwrap();
        assert!(p < 1e-300);
        // scaling the kernel by 4 halves the width
        let g4 = gauss(vec![0.0], DMatrix::from_element(1, 1, 4.0));
        let p = violation_probability(&g4, &LinearConstraint::upper(1, 0, 0.5)).unwrap();
        assert!((p - normal_upper_tail(1.0)).abs() < 1e-15);
    }

    #[test]
    fn truncated_variance_examples() {
        assert!((truncated_variance_v(0.0, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        assert!((truncated_variance_v(1e-12, normal_upper_quantile(1e-12)).unwrap() - 1.0).abs() < 1e-9);
        let half = truncated_variance_v(0.5, 0.0).unwrap();
        assert!((half - (1.0 - 2.0 / PI)).abs() < 1e-15);
        assert!((half - 0.36338).abs() < 1e-5);
        assert!((truncated_variance_oracle(0.0) - half).abs() < 1e-9);
        assert!(matches!(truncated_variance_v(1.0, 0.0), Err(Error::Domain(_))));
        for p in [0.5, 0.4, 0.2, 0.1, 0.05, 0.01, 1e-3] {
            let x = std::f64::consts::SQRT_2 * erf_inv(1.0 - 2.0 * p);
            let v = truncated_variance_v(p, x).unwrap();
            assert!((v - truncated_variance_oracle(x)).abs() < 1e-8, "p = {p}");
            assert!((v - truncated_variance_at(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn one_dimensional_step() {
        let g = gauss(vec![0.0], DMatrix::from_element(1, 1, 1.0));
        let c = [LinearConstraint::upper(1, 0, 0.0)];
        let (next, rec) = shrink_step(&g, &c, 0.1).unwrap();
        assert!((rec.p_target - 0.4).abs() < 1e-15);
        assert!((normal_upper_quantile(0.4) - 0.25335).abs() < 1e-5);
        let p = violation_probability(&next, &c[0]).unwrap();
        assert!((p - 0.4).abs() < 1e-8);
        // variance inside the feasible side is preserved
        let before = truncated_variance_oracle(0.0);
        let f = next.kernel.matrix[(0, 0)];
        let x_new = (0.0 - next.center[0]) * f.sqrt();
        let after = truncated_variance_oracle(x_new) / f;
        assert!((after - before).abs() < 1e-8);
        assert!(rec.xi >= 0.0);
    }

    #[test]
    fn orthogonal_direction_is_untouched() {
        let g = gauss(vec![0.0, 0.0], DMatrix::identity(2, 2));
        let c = [LinearConstraint::upper(2, 0, 0.0)];
        let (next, _) = shrink_step(&g, &c, 0.1).unwrap();
        let cov = spd_inverse(&next.kernel.matrix).unwrap();
        assert_eq!(cov[(1, 1)], 1.0);
        assert_eq!(next.center[1], 0.0);
    }

    #[test]
    fn empty_constraint_list() {
        let g = gauss(vec![0.0], DMatrix::from_element(1, 1, 1.0));
        assert!(matches!(shrink_step(&g, &[], 0.1), Err(Error::NoConstraint)));
        let singular = gauss(vec![0.0, 0.0], DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        assert!(matches!(
            shrink_step(&singular, &[LinearConstraint::upper(2, 0, 1.0)], 0.1),
            Err(Error::SingularKernel { .. })
        ));
    }

    #[test]
    fn interior_two_pixel_point_needs_no_correction() {
        let m = Model::new(ModelSpec::TwoPixel(TwoPixelSpec {
            n_mean: 1000.0,
            eta: 0.7,
            h0: 1.0,
            h1: 0.8,
        }))
        .unwrap();
        let f = fim_poisson(&m, &[0.5, 0.5]).unwrap();
        let (out, center, report) = correct_fim(&f, &[0.5, 0.5], &box_constraints(&BoxDomain::unit(2))).unwrap();
        assert_eq!(report.iterations, 0);
        assert_eq!(out, f);
        assert_eq!(center, vec![0.5, 0.5]);
    }

    const K: f64 = 1568.0;

    fn loop_1d(f: f64, a: f64) -> f64 {
        let c = box_constraints(&BoxDomain::unit(1));
        let (out, _, report) = correct_fim(&FisherMatrix::from_diagonal(&[f]), &[a], &c).unwrap();
        assert!(report.final_violation_probs.iter().all(|p| *p <= STOP_THRESHOLD));
        out.matrix[(0, 0)]
    }

    #[test]
    fn closed_form_matches_loop() {
        // interior point: both constraints inactive
        let f = K * 0.25;
        assert_eq!(correct_fim_1d_closed(f, 0.5, 0.0, 1.0).unwrap(), f);
        assert_eq!(loop_1d(f, 0.5), f);
        // upper constraint active at the boundary
        let closed = correct_fim_1d_closed(K, 1.0, 0.0, 1.0).unwrap();
        assert!(closed > K);
        assert!((closed / loop_1d(K, 1.0) - 1.0).abs() < 1e-6);
        assert!((closed / K - 2.629).abs() < 1e-3);
        // lower constraint active on the regularized information at A = 0
        let reg = K.sqrt() / 4.0;
        let closed = correct_fim_1d_closed(reg, 0.0, 0.0, 1.0).unwrap();
        assert!((closed / loop_1d(reg, 0.0) - 1.0).abs() < 1e-6);
        assert!((closed.powf(-0.5) - 0.196).abs() < 1e-3);
        // a wide Gaussian violates both sides
        assert!(matches!(
            correct_fim_1d_closed(1.0, 0.5, 0.0, 1.0),
            Err(Error::TwoActiveConstraints { .. })
        ));
    }

    #[test]
    fn activation_thresholds() {
        // lower side becomes active below A ≈ 0.242, upper above A ≈ 0.937
        let p_lo = |a: f64| normal_upper_tail((K * a * a).sqrt() * a);
        let p_up = |a: f64| normal_upper_tail((K * a * a).sqrt() * (1.0 - a));
        assert!(p_lo(0.243) < STOP_THRESHOLD && p_lo(0.241) > STOP_THRESHOLD);
        assert!(p_up(0.936) < STOP_THRESHOLD && p_up(0.938) > STOP_THRESHOLD);
    }

    fn figure3() -> (FisherMatrix, Vec<f64>, Vec<LinearConstraint>) {
        let cov = DMatrix::from_row_slice(2, 2, &[0.01, 0.005, 0.005, 0.01]);
        let f = FisherMatrix::new(spd_inverse(&cov).unwrap());
        let c = vec![LinearConstraint::upper(2, 0, 1.0), LinearConstraint::upper(2, 1, 1.0)];
        (f, vec![0.85, 0.95], c)
    }

    #[test]
    fn two_dimensional_correction_against_truncated_sampling() {
        let (f, theta, c) = figure3();
        let (out, _, report) = correct_fim(&f, &theta, &c).unwrap();
        assert!(report.iterations >= 2);
        let before = total_variance(&f).unwrap();
        let after = total_variance(&out).unwrap();
        assert!(after < before);

        // rejection-sample the truncated Gaussian
        let cov = spd_inverse(&f.matrix).unwrap();
        let l = cov.clone().cholesky().unwrap().l();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut kept: Vec<[f64; 2]> = Vec::new();
        while kept.len() < 200_000 {
            let z = [gaussian(&mut rng), gaussian(&mut rng)];
            let x = [
                theta[0] + l[(0, 0)] * z[0],
                theta[1] + l[(1, 0)] * z[0] + l[(1, 1)] * z[1],
            ];
            if x[0] <= 1.0 && x[1] <= 1.0 {
                kept.push(x);
            }
        }
        let n = kept.len() as f64;
        let mean = [kept.iter().map(|x| x[0]).sum::<f64>() / n, kept.iter().map(|x| x[1]).sum::<f64>() / n];
        let var: f64 = kept
            .iter()
            .map(|x| (x[0] - mean[0]).powi(2) + (x[1] - mean[1]).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        assert!((after / var - 1.0).abs() < 0.25, "corrected {after} vs sampled {var}");
    }

    fn gaussian(rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random::<f64>().max(1e-300);
        let v: f64 = rng.random();
        (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn steps_are_exact_and_monotone(
            f00 in 0.5f64..50.0, f11 in 0.5f64..50.0, r in -0.9f64..0.9,
            c0 in 0.0f64..1.0, c1 in 0.0f64..1.0,
        ) {
            let off = r * (f00 * f11).sqrt();
            let f = FisherMatrix::new(DMatrix::from_row_slice(2, 2, &[f00, off, off, f11]));
            let theta = vec![c0, c1];
            let c = box_constraints(&BoxDomain::unit(2));
            let mut g = GaussianApprox { center: theta.clone(), kernel: f.clone() };
            for _ in 0..5 {
                let probs = violation_probabilities(&g, &c).unwrap();
                if probs.iter().all(|p| *p <= STOP_THRESHOLD) {
                    break;
                }
                let (next, rec) = shrink_step(&g, &c, STEP_ETA).unwrap();
                prop_assert!(rec.xi >= 0.0);
                let p_after = violation_probability(&next, &c[rec.constraint]).unwrap();
                prop_assert!((p_after - rec.p_target).abs() < 1e-8);
                // rank-one PSD update
                let diff = &next.kernel.matrix - &g.kernel.matrix;
                let eig = crate::linalg::sym_eigen(&diff);
                prop_assert!(eig.values[0] >= -1e-9 * eig.max().abs().max(1.0));
                prop_assert!(eig.values[0].abs() <= 1e-9 * eig.max().abs().max(1.0));
                g = next;
            }
            if let Ok((out, _, report)) = correct_fim(&f, &theta, &c) {
                prop_assert!(report.final_violation_probs.iter().all(|p| *p <= STOP_THRESHOLD));
                let (a, b) = (total_variance(&out).unwrap(), total_variance(&f).unwrap());
                prop_assert!(a <= b + 1e-10);
            }
        }

        #[test]
        fn whitening_round_trip(f00 in 0.5f64..50.0, f11 in 0.5f64..50.0, r in -0.9f64..0.9) {
            let off = r * (f00 * f11).sqrt();
            let m = DMatrix::from_row_slice(2, 2, &[f00, off, off, f11]);
            let (t, ti) = sqrt_pair(&m).unwrap();
            let x = DVector::from_vec(vec![0.3, -1.7]);
            prop_assert!((&ti * (&t * &x) - &x).amax() < 1e-10 * x.amax());
        }
    }
}
