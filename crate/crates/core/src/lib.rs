//! Stability of two-dimensional linear systems with Caputo derivatives of
//! distinct orders `q1, q2 ∈ (0, 1]`.
//!
//! - [`char_eq`]: the characteristic function `Δ(s) = s^(q1+q2) − a11·s^q2 − a22·s^q1 + det A`.
//! - [`gamma_curve`]: the critical curve where Δ has a pure imaginary root.
//! - [`classifier`]: order-independent regions and the curve-based verdict.
//! - [`root_oracle`]: argument-principle root counts and companion-matrix reduction.
//! - [`simulator`]: fractional Adams predictor-corrector trajectories.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod char_eq;
pub mod classifier;
pub mod error;
pub mod gamma_curve;
pub mod root_oracle;
pub mod simulator;
