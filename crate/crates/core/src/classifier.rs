//! Exact decision procedures.
//!
//! For `δ < 0` the system is unstable for every order pair. For `δ > 0` the
//! regions
//!
//! ```text
//! R_u(δ) = { a11 + a22 ≥ δ + 1 } ∪ { a11 > 0, a22 > 0, a11·a22 ≥ δ }
//! R_s(δ) = { a11 + a22 < 0, max(a11, a22) < min(1, δ) }
//! ```
//!
//! decide instability / stability regardless of the orders. Everything else
//! depends on the orders and is settled by the sign of `a22 − φ(a11)`.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::char_eq::{CharParams, SystemSpec};
use crate::error::{Error, Result};
use crate::gamma_curve::{phi, CurveParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    UnstableAllOrders,
    StableAllOrders,
    StableForOrders,
    UnstableForOrders,
    MarginalOnCurve,
}

impl VerdictKind {
    pub fn is_stable(self) -> bool {
        matches!(self, Self::StableAllOrders | Self::StableForOrders)
    }

    pub fn is_unstable(self) -> bool {
        matches!(self, Self::UnstableAllOrders | Self::UnstableForOrders)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::UnstableAllOrders => "UnstableAllOrders",
            Self::StableAllOrders => "StableAllOrders",
            Self::StableForOrders => "StableForOrders",
            Self::UnstableForOrders => "UnstableForOrders",
            Self::MarginalOnCurve => "MarginalOnCurve",
        }
    }
}

/// Which rule produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reason {
    NegativeDelta,
    SumExceedsDeltaPlusOne,
    PositiveProductExceedsDelta,
    RsMembership,
    BelowGamma,
    AboveGamma,
    OnGamma,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::NegativeDelta => "NegativeDelta",
            Self::SumExceedsDeltaPlusOne => "SumExceedsDeltaPlusOne",
            Self::PositiveProductExceedsDelta => "PositiveProductExceedsDelta",
            Self::RsMembership => "RsMembership",
            Self::BelowGamma => "BelowGamma",
            Self::AboveGamma => "AboveGamma",
            Self::OnGamma => "OnGamma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub reason: Reason,
    /// `a22 − φ(a11)` for order-dependent verdicts, 0 otherwise.
    pub margin: f64,
    pub phi: Option<f64>,
    /// Algebraic decay exponent `min(q1, q2)` of stable verdicts.
    pub decay_exponent: Option<f64>,
}

impl Verdict {
    fn order_independent(kind: VerdictKind, reason: Reason) -> Self {
        Self {
            kind,
            reason,
            margin: 0.0,
            phi: None,
            decay_exponent: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionMembership {
    pub in_ru: bool,
    pub in_rs: bool,
}

pub fn region_membership(a11: f64, a22: f64, delta: f64) -> Result<RegionMembership> {
    if !(delta > 0.0) {
        return Err(Error::DeltaNotPositive(delta));
    }
    let in_ru = a11 + a22 >= delta + 1.0 || (a11 > 0.0 && a22 > 0.0 && a11 * a22 >= delta);
    let in_rs = a11 + a22 < 0.0 && a11.max(a22) < delta.min(1.0);
    Ok(RegionMembership { in_ru, in_rs })
}

/// Rules that hold for every order pair in `(0, 1]²`; `None` when the
/// outcome depends on the orders (including `δ = 0`).
pub fn classify_order_independent(a11: f64, a22: f64, delta: f64) -> Option<Verdict> {
    if delta < 0.0 {
        return Some(Verdict::order_independent(
            VerdictKind::UnstableAllOrders,
            Reason::NegativeDelta,
        ));
    }
    if !(delta > 0.0) {
        return None;
    }
    let m = region_membership(a11, a22, delta).ok()?;
    if m.in_ru {
        let reason = if a11 + a22 >= delta + 1.0 {
            Reason::SumExceedsDeltaPlusOne
        } else {
            Reason::PositiveProductExceedsDelta
        };
        Some(Verdict::order_independent(
            VerdictKind::UnstableAllOrders,
            reason,
        ))
    } else if m.in_rs {
        Some(Verdict::order_independent(
            VerdictKind::StableAllOrders,
            Reason::RsMembership,
        ))
    } else {
        None
    }
}

pub fn tie_tolerance(a22: f64) -> f64 {
    1e-10 * (1.0 + a22.abs())
}

/// Full classification of a system from its characteristic parameters.
pub fn classify_params(p: &CharParams) -> Result<Verdict> {
    let decay = p.q1.min(p.q2);
    if let Some(mut v) = classify_order_independent(p.a11, p.a22, p.delta) {
        if v.kind.is_stable() {
            v.decay_exponent = Some(decay);
        }
        return Ok(v);
    }
    if p.delta == 0.0 {
        return Err(Error::DeltaZeroUnclassified);
    }
    let cp = CurveParams::new(p.delta, p.q1, p.q2)?;
    let boundary = phi(&cp, p.a11)?;
    let margin = p.a22 - boundary;
    let tie = tie_tolerance(p.a22);
    let (kind, reason, decay_exponent) = if margin < -tie {
        (
            VerdictKind::StableForOrders,
            Reason::BelowGamma,
            Some(decay),
        )
    } else if margin > tie {
        (VerdictKind::UnstableForOrders, Reason::AboveGamma, None)
    } else {
        (VerdictKind::MarginalOnCurve, Reason::OnGamma, None)
    };
    Ok(Verdict {
        kind,
        reason,
        margin,
        phi: Some(boundary),
        decay_exponent,
    })
}

pub fn classify(s: &SystemSpec) -> Result<Verdict> {
    classify_params(&s.char_params())
}

/// Verdicts over the order grid `q1 = j/n`, `q2 = k/n`, `j, k = 1..=n`,
/// stored row-major by q1 then q2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QScan {
    pub grid_n: usize,
    pub cells: Vec<VerdictKind>,
}

impl QScan {
    pub fn order(&self, index: usize) -> f64 {
        index as f64 / self.grid_n as f64
    }

    /// Verdict at `(q1, q2) = (j/n, k/n)` for `1 ≤ j, k ≤ n`.
    pub fn kind(&self, j: usize, k: usize) -> VerdictKind {
        assert!((1..=self.grid_n).contains(&j) && (1..=self.grid_n).contains(&k));
        self.cells[(j - 1) * self.grid_n + (k - 1)]
    }

    pub fn stable(&self, j: usize, k: usize) -> bool {
        self.kind(j, k).is_stable()
    }

    /// `(q1, q2, kind)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, VerdictKind)> + '_ {
        self.cells.iter().enumerate().map(move |(i, &kind)| {
            let j = i / self.grid_n + 1;
            let k = i % self.grid_n + 1;
            (self.order(j), self.order(k), kind)
        })
    }
}

pub fn qscan(a11: f64, a22: f64, delta: f64, grid_n: usize) -> Result<QScan> {
    if !(delta > 0.0) {
        return Err(Error::DeltaNotPositive(delta));
    }
    if grid_n < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid must be at least 2, got {grid_n}"
        )));
    }
    let cells = (0..grid_n * grid_n)
        .into_par_iter()
        .map(|i| {
            let q1 = (i / grid_n + 1) as f64 / grid_n as f64;
            let q2 = (i % grid_n + 1) as f64 / grid_n as f64;
            let p = CharParams::new(a11, a22, delta, q1, q2)?;
            classify_params(&p).map(|v| v.kind)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QScan { grid_n, cells })
}

/// `α^y·cos y + α^(y−x)·cos(y−x) + α^(−x)·cos x`.
pub fn a2_inequality_value(x: f64, y: f64, alpha: f64) -> Result<f64> {
    let in_box = |v: f64| (0.0..=FRAC_PI_2).contains(&v);
    if !(in_box(x) && in_box(y)) || !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::DomainError(format!(
            "need x, y in [0, pi/2] and alpha > 0, got x = {x}, y = {y}, alpha = {alpha}"
        )));
    }
    Ok(alpha.powf(y) * y.cos() + alpha.powf(y - x) * (y - x).cos() + alpha.powf(-x) * x.cos())
}

/// Whether the trigonometric lower bound used for the stability region
/// holds at `(x, y, α)`, with slack `−1e−12`.
pub fn a2_inequality_check(x: f64, y: f64, alpha: f64) -> Result<bool> {
    Ok(a2_inequality_value(x, y, alpha)? - 1.0 >= -1e-12)
}
