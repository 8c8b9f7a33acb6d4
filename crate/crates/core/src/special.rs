//! Error function helpers and their inverses.
//!
//! `erf`, `erfc` and `ln_gamma` come from `libm`; the inverses are bracketed
//! Newton solves on those functions, converged to 1e-14 absolute in the
//! argument.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

pub use libm::{erf, erfc};

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

const ROOT_TOL: f64 = 1e-14;
const BRACKET: f64 = 40.0;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Mass of a standard normal above `x`: `½·erfc(x/√2)`.
pub fn normal_upper_tail(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Safeguarded Newton iteration for a decreasing function `f` on `[lo, hi]`
/// with `f(lo) > 0 > f(hi)`.
fn solve_decreasing(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = df(x);
        let newton = if slope != 0.0 { x - fx / slope } else { f64::NAN };
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step < ROOT_TOL * 0.01 || hi - lo < ROOT_TOL {
            break;
        }
    }
    x
}

/// Inverse error function on `(-1, 1)`; returns ±∞ at the endpoints.
pub fn erf_inv(y: f64) -> f64 {
    if y.is_nan() || !(-1.0..=1.0).contains(&y) {
        return f64::NAN;
    }
    if y == 1.0 {
        return f64::INFINITY;
    }
    if y == -1.0 {
        return f64::NEG_INFINITY;
    }
    // erf is increasing; solve -(erf(x) - y) which decreases.
    let two_over_sqrt_pi = 2.0 / PI.sqrt();
    solve_decreasing(
        |x| y - erf(x),
        |x| -two_over_sqrt_pi * (-x * x).exp(),
        -BRACKET / SQRT_2,
        BRACKET / SQRT_2,
    )
}

/// Point `x` with `normal_upper_tail(x) = p`, i.e. `√2·erf⁻¹(1 − 2p)`.
///
/// Solved on `erfc` directly so that small tail masses keep full relative
/// precision.
pub fn normal_upper_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::INFINITY;
    }
    if p == 1.0 {
        return f64::NEG_INFINITY;
    }
    solve_decreasing(
        |x| normal_upper_tail(x) - p,
        |x| -normal_pdf(x),
        -BRACKET,
        BRACKET,
    )
}
