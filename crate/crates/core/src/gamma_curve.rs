//! The critical curve Γ(δ, q1, q2) in the (a11, a22)-plane.
//!
//! Γ is the set of diagonal entries for which the characteristic function
//! has a pair of pure imaginary roots. It is parametrized by ω ∈ ℝ as
//!
//! ```text
//! a11(ω) = δ^(q1/(q1+q2)) · h(ω, q1, q2)
//! a22(ω) = δ^(q2/(q1+q2)) · h(−ω, q1, q2)
//! ```
//!
//! with `h(ω) = ρ2·e^(q1ω) − ρ1·e^(−q2ω)` for incommensurate orders and
//! `h(ω) = cos(qπ/2) − ω` for `q1 = q2 = q`. Γ is the graph of a decreasing
//! concave bijection φ: ℝ → ℝ; points strictly below it are stable, points
//! strictly above it are unstable.
//!
//! When `|q1 − q2| ≤ EPS_COMM` the ratios ρ1, ρ2 lose all precision and the
//! straight-line formula is used instead. The two parametrizations of ω do
//! not agree across that switch; only the curve as a point set does.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::char_eq::check_order;
use crate::error::{Error, Result};

/// Order gap below which the commensurate line formula is used.
pub const EPS_COMM: f64 = 1e-8;

const BISECT_REL_WIDTH: f64 = 1e-13;
const RESIDUAL_ABS: f64 = 1e-12;
const RESIDUAL_REL: f64 = 1e-10;

pub fn is_commensurate(q1: f64, q2: f64) -> bool {
    (q1 - q2).abs() <= EPS_COMM
}

/// Parameters of a single critical curve; δ must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    delta: f64,
    q1: f64,
    q2: f64,
}

impl CurveParams {
    pub fn new(delta: f64, q1: f64, q2: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::DeltaNotPositive(delta));
        }
        Ok(Self {
            delta,
            q1: check_order(q1)?,
            q2: check_order(q2)?,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn q2(&self) -> f64 {
        self.q2
    }

    /// `δ^(q1/(q1+q2))`
    pub fn scale1(&self) -> f64 {
        self.delta.powf(self.q1 / (self.q1 + self.q2))
    }

    /// `δ^(q2/(q1+q2))`
    pub fn scale2(&self) -> f64 {
        self.delta.powf(self.q2 / (self.q1 + self.q2))
    }

    /// Modulus of the pure imaginary root carried by the curve point at ω.
    pub fn imaginary_root_modulus(&self, omega: f64) -> f64 {
        if is_commensurate(self.q1, self.q2) {
            // the line parametrization puts every point on the same root
            self.delta.powf(1.0 / (self.q1 + self.q2))
        } else {
            self.delta.powf(1.0 / (self.q1 + self.q2)) * omega.exp()
        }
    }
}

/// One sample of Γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub omega: f64,
    pub a11: f64,
    pub a22: f64,
}

impl CurvePoint {
    pub fn in_third_quadrant(&self) -> bool {
        self.a11 < 0.0 && self.a22 < 0.0
    }
}

/// `ρ_k = sin(q_k·π/2) / sin((q2 − q1)·π/2)` for `k ∈ {1, 2}`.
pub fn rho(k: u8, q1: f64, q2: f64) -> Result<f64> {
    if is_commensurate(q1, q2) {
        return Err(Error::CommensurateOrders { q1, q2 });
    }
    let qk = match k {
        1 => q1,
        2 => q2,
        _ => {
            return Err(Error::DomainError(format!(
                "rho index must be 1 or 2, got {k}"
            )))
        }
    };
    Ok((qk * FRAC_PI_2).sin() / ((q2 - q1) * FRAC_PI_2).sin())
}

/// The shape function h(ω, q1, q2).
///
/// Strictly increasing in ω when `q1 < q2`, strictly decreasing when
/// `q1 > q2` and in the commensurate branch.
pub fn h_func(omega: f64, q1: f64, q2: f64) -> f64 {
    if is_commensurate(q1, q2) {
        let q = 0.5 * (q1 + q2);
        (q * FRAC_PI_2).cos() - omega
    } else {
        // sin(q2π/2)·e^(q1ω) − sin(q1π/2)·e^(−q2ω), split so that the
        // ω-independent difference of sines carries no cancellation
        let s1 = (q1 * FRAC_PI_2).sin();
        let s2 = (q2 * FRAC_PI_2).sin();
        let sine_gap = 2.0 * ((q1 + q2) * PI / 4.0).cos() * ((q2 - q1) * PI / 4.0).sin();
        let num = sine_gap + s2 * (q1 * omega).exp_m1() - s1 * (-q2 * omega).exp_m1();
        num / ((q2 - q1) * FRAC_PI_2).sin()
    }
}

pub fn curve_point(cp: &CurveParams, omega: f64) -> CurvePoint {
    CurvePoint {
        omega,
        a11: cp.scale1() * h_func(omega, cp.q1, cp.q2),
        a22: cp.scale2() * h_func(-omega, cp.q1, cp.q2),
    }
}

/// Finds the unique ω* with `δ^(q1/(q1+q2))·h(ω*) = a11`.
///
/// Incommensurate orders use bracket doubling from `[−1, 1]` followed by
/// bisection; the commensurate branch is linear and solved in closed form.
pub fn solve_omega_star(cp: &CurveParams, a11: f64) -> Result<f64> {
    if !a11.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "a11 must be finite, got {a11}"
        )));
    }
    let scale = cp.scale1();
    if is_commensurate(cp.q1, cp.q2) {
        let q = 0.5 * (cp.q1 + cp.q2);
        return Ok((q * FRAC_PI_2).cos() - a11 / scale);
    }

    let residual = |w: f64| scale * h_func(w, cp.q1, cp.q2) - a11;
    let limit = 700.0 / cp.q1.min(cp.q2);

    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    let (mut f_lo, mut f_hi) = (residual(lo), residual(hi));
    while f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
        if hi >= limit {
            return Err(Error::BracketFailure { a11, limit });
        }
        lo = (2.0 * lo).max(-limit);
        hi = (2.0 * hi).min(limit);
        f_lo = residual(lo);
        f_hi = residual(hi);
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }

    let tol = RESIDUAL_ABS + RESIDUAL_REL * a11.abs();
    let (mut best, mut f_best) = if f_lo.abs() < f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = residual(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.abs() < f_best.abs() {
            best = mid;
            f_best = f_mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        let narrow = hi - lo <= BISECT_REL_WIDTH * mid.abs().max(1.0);
        if narrow && f_best.abs() <= tol {
            break;
        }
    }
    Ok(best)
}

/// The boundary function φ(a11) whose graph is Γ.
pub fn phi(cp: &CurveParams, a11: f64) -> Result<f64> {
    let omega = solve_omega_star(cp, a11)?;
    Ok(cp.scale2() * h_func(-omega, cp.q1, cp.q2))
}

/// `n` curve points at uniformly spaced ω in `[omega_min, omega_max]`.
pub fn sample_curve(
    cp: &CurveParams,
    omega_min: f64,
    omega_max: f64,
    n: usize,
) -> Result<Vec<CurvePoint>> {
    if !(omega_min.is_finite() && omega_max.is_finite() && omega_min < omega_max) {
        return Err(Error::InvalidArgument(format!(
            "need omega_min < omega_max, got [{omega_min}, {omega_max}]"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    let step = (omega_max - omega_min) / (n - 1) as f64;
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let omega = if i == n - 1 {
                omega_max
            } else {
                omega_min + step * i as f64
            };
            curve_point(cp, omega)
        })
        .collect())
}

/// `ln(x / sin x)` for `x ∈ (0, π)`, with a series near zero.
fn ln_x_over_sin(x: f64) -> f64 {
    if x < 1e-2 {
        let x2 = x * x;
        x2 / 6.0 + x2 * x2 / 180.0 + x2 * x2 * x2 / 2835.0
    } else {
        (x / x.sin()).ln()
    }
}

/// Maximum over `t > 0` of `ρ2·t^q1 − ρ1·t^q2` for `0 < q1 < q2 ≤ 1`.
///
/// Evaluated through `v(x) = x·ln(x / sin x)` as
/// `ln u_max = (v(x) + v(y − x) − v(y)) / (y − x)` with `x = q1π/2`,
/// `y = q2π/2`, which avoids the large exponents of the product form.
pub fn u_max(q1: f64, q2: f64) -> Result<f64> {
    if !(q1 > 0.0 && q1 < q2 && q2 <= 1.0) {
        return Err(Error::DomainError(format!(
            "u_max needs 0 < q1 < q2 <= 1, got q1 = {q1}, q2 = {q2}"
        )));
    }
    let v = |x: f64| x * ln_x_over_sin(x);
    let x = q1 * PI / 2.0;
    let y = q2 * PI / 2.0;
    let ln_u = (v(x) + v(y - x) - v(y)) / (y - x);
    Ok(ln_u.exp())
}
