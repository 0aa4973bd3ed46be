//! System description and the characteristic function
//!
//! ```text
//! Δ(s) = s^(q1+q2) − a11·s^q2 − a22·s^q1 + δ
//! ```
//!
//! Every complex power is taken on the principal branch,
//! `s^q = exp(q·(ln|s| + i·Arg s))` with `Arg s ∈ (−π, π]`. Points on the
//! negative real axis use `Arg s = π` regardless of the sign of the zero
//! imaginary part; the characteristic equation is never evaluated there by
//! the theory, so this is a convention rather than a derived fact.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn check_order(q: f64) -> Result<f64> {
    if q.is_finite() && q > 0.0 && q <= 1.0 {
        Ok(q)
    } else {
        Err(Error::InvalidOrder(q))
    }
}

fn check_finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

/// A two-dimensional multi-order system `ᶜD^q1 x = a11 x + a12 y`,
/// `ᶜD^q2 y = a21 x + a22 y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    a11: f64,
    a12: f64,
    a21: f64,
    a22: f64,
    q1: f64,
    q2: f64,
}

impl SystemSpec {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64, q1: f64, q2: f64) -> Result<Self> {
        Ok(Self {
            a11: check_finite("a11", a11)?,
            a12: check_finite("a12", a12)?,
            a21: check_finite("a21", a21)?,
            a22: check_finite("a22", a22)?,
            q1: check_order(q1)?,
            q2: check_order(q2)?,
        })
    }

    /// Builds a system from a row-major matrix.
    pub fn from_matrix(a: [[f64; 2]; 2], q1: f64, q2: f64) -> Result<Self> {
        Self::new(a[0][0], a[0][1], a[1][0], a[1][1], q1, q2)
    }

    pub fn a11(&self) -> f64 {
        self.a11
    }

    pub fn a12(&self) -> f64 {
        self.a12
    }

    pub fn a21(&self) -> f64 {
        self.a21
    }

    pub fn a22(&self) -> f64 {
        self.a22
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn q2(&self) -> f64 {
        self.q2
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    /// `det(A) = a11·a22 − a12·a21`, evaluated exactly in that order.
    pub fn delta(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    /// Same matrix with different orders.
    pub fn with_orders(&self, q1: f64, q2: f64) -> Result<Self> {
        Self::new(self.a11, self.a12, self.a21, self.a22, q1, q2)
    }

    pub fn char_params(&self) -> CharParams {
        CharParams {
            a11: self.a11,
            a22: self.a22,
            delta: self.delta(),
            q1: self.q1,
            q2: self.q2,
        }
    }
}

/// The five parameters the characteristic function depends on.
///
/// Also describes the three-term scalar equation
/// `ᶜD^(q1+q2) x − a11 ᶜD^q2 x − a22 ᶜD^q1 x + δ x = 0`, which shares Δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharParams {
    pub a11: f64,
    pub a22: f64,
    pub delta: f64,
    pub q1: f64,
    pub q2: f64,
}

impl CharParams {
    pub fn new(a11: f64, a22: f64, delta: f64, q1: f64, q2: f64) -> Result<Self> {
        Ok(Self {
            a11: check_finite("a11", a11)?,
            a22: check_finite("a22", a22)?,
            delta: check_finite("delta", delta)?,
            q1: check_order(q1)?,
            q2: check_order(q2)?,
        })
    }

    pub fn with_orders(&self, q1: f64, q2: f64) -> Result<Self> {
        Self::new(self.a11, self.a22, self.delta, q1, q2)
    }

    pub fn with_diagonal(&self, a11: f64, a22: f64) -> Result<Self> {
        Self::new(a11, a22, self.delta, self.q1, self.q2)
    }
}

impl From<SystemSpec> for CharParams {
    fn from(s: SystemSpec) -> Self {
        s.char_params()
    }
}

impl From<&SystemSpec> for CharParams {
    fn from(s: &SystemSpec) -> Self {
        s.char_params()
    }
}

/// Principal argument in `(−π, π]`; the negative real axis maps to `π`
/// even when the imaginary part is `-0.0`.
pub fn principal_arg(s: Complex64) -> f64 {
    if s.im == 0.0 && s.re < 0.0 {
        PI
    } else {
        s.im.atan2(s.re)
    }
}

/// Principal logarithm `ln|s| + i·Arg s`.
pub fn principal_ln(s: Complex64) -> Complex64 {
    Complex64::new(s.norm().ln(), principal_arg(s))
}

/// Principal power `s^q`. Returns 0 at `s = 0` (all orders used are positive).
pub fn principal_pow(s: Complex64, q: f64) -> Complex64 {
    if s == Complex64::new(0.0, 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    (principal_ln(s) * q).exp()
}

/// Evaluates Δ(s). `Δ(0)` is the limiting value δ.
pub fn delta_eval(p: &CharParams, s: Complex64) -> Complex64 {
    if s == Complex64::new(0.0, 0.0) {
        return Complex64::new(p.delta, 0.0);
    }
    let ln_s = principal_ln(s);
    let s1 = (ln_s * p.q1).exp();
    let s2 = (ln_s * p.q2).exp();
    let s12 = (ln_s * (p.q1 + p.q2)).exp();
    s12 - s2 * p.a11 - s1 * p.a22 + p.delta
}

/// `s·Δ'(s) = (q1+q2)·s^(q1+q2) − a11·q2·s^q2 − a22·q1·s^q1`, the derivative
/// of `w ↦ Δ(e^w)`.
pub fn delta_log_derivative(p: &CharParams, s: Complex64) -> Complex64 {
    if s == Complex64::new(0.0, 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let ln_s = principal_ln(s);
    let s1 = (ln_s * p.q1).exp();
    let s2 = (ln_s * p.q2).exp();
    let s12 = (ln_s * (p.q1 + p.q2)).exp();
    s12 * (p.q1 + p.q2) - s2 * (p.a11 * p.q2) - s1 * (p.a22 * p.q1)
}

/// Checks `Δ(conj s) = conj(Δ(s))` to `1e−12·(1 + |Δ(s)|)`.
pub fn conjugate_symmetry_check(p: &CharParams, s: Complex64) -> bool {
    let d = delta_eval(p, s);
    let dc = delta_eval(p, s.conj());
    (dc - d.conj()).norm() <= 1e-12 * (1.0 + d.norm())
}
