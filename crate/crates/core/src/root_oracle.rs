//! Independent root-counting oracles for the characteristic function.
//!
//! Every root of Δ with `Re s ≥ 0` satisfies `l ≤ |s| ≤ L` for explicit
//! bounds depending on δ, the orders and the diagonal `a = (a11, a22)`.
//! That makes the closed right half-plane count finite and computable by the
//! argument principle over the half-annulus `{Re s ≥ 0, l ≤ |s| ≤ L}`.
//!
//! Rational orders admit a second route: rewriting the system as a
//! commensurate system of order `1/n` and checking the eigenvalue sector
//! `|Arg λ| > π/(2n)`.

use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::Array2;
use ndarray_linalg::EigVals;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::char_eq::{delta_eval, CharParams, SystemSpec};
use crate::error::{Error, Result};

const CONTOUR_MARGIN: f64 = 1e-3;
const INITIAL_SAMPLES: usize = 256;
const MAX_DOUBLINGS: u32 = 24;
/// Accepted phase step between consecutive contour samples.
const PHASE_STEP: f64 = FRAC_PI_2 / 2.0;

/// Modulus bounds for the unstable roots, together with the constants they
/// were computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootBounds {
    pub lower: f64,
    pub upper: f64,
    /// Norm exponent `p = (q1+q2) / (2·min(q1,q2))`.
    pub p: f64,
    /// `γ = (q+1)/(q−1)`, `q = (q1+q2)/|q1−q2|`; 1 in the commensurate limit.
    pub gamma_const: f64,
    /// `D = max(δ^(−q1/(2·min)), δ^(−q2/(2·min)))`.
    pub d_const: f64,
}

impl RootBounds {
    pub fn contains(&self, modulus: f64) -> bool {
        self.lower <= modulus && modulus <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootCountReport {
    pub n_unstable: usize,
    pub bounds: RootBounds,
    pub contour_samples: usize,
    pub winding_turns: f64,
    pub refinement_depth: u32,
}

pub fn unstable_root_bounds(p: &CharParams) -> Result<RootBounds> {
    if !(p.delta > 0.0) {
        return Err(Error::DeltaNotPositive(p.delta));
    }
    let (q1, q2, delta) = (p.q1, p.q2, p.delta);
    let q_min = q1.min(q2);

    if q1 == q2 {
        // z = s^q solves z² − (a11+a22)·z + δ = 0, so |z| ≤ |a11+a22| + √δ and
        // the product of the two roots is δ
        let z_max = p.a11.abs() + p.a22.abs() + delta.sqrt() + 1.0;
        let z_min = delta / z_max;
        return Ok(RootBounds {
            lower: z_min.powf(1.0 / q1),
            upper: z_max.powf(1.0 / q1),
            p: 1.0,
            gamma_const: 1.0,
            d_const: delta.powf(-0.5),
        });
    }

    let norm_exp = (q1 + q2) / (2.0 * q_min);
    let conj_exp = (q1 + q2) / (q1 - q2).abs();
    let gamma = (conj_exp + 1.0) / (conj_exp - 1.0);
    let d_const = delta
        .powf(-q1 / (2.0 * q_min))
        .max(delta.powf(-q2 / (2.0 * q_min)));
    let u = d_const * (p.a11.abs().powf(norm_exp) + p.a22.abs().powf(norm_exp));

    // f(u) = (−u + √(u² + 4γ)) / (2γ), rationalized
    let small = 2.0 / (u + u.hypot(2.0 * gamma.sqrt()));
    let large = u + gamma.sqrt();
    let alpha = 0.5 * (q1 + q2);
    Ok(RootBounds {
        lower: (delta.sqrt() * small).powf(1.0 / alpha),
        upper: (delta.sqrt() * large).powf(1.0 / alpha),
        p: norm_exp,
        gamma_const: gamma,
        d_const,
    })
}

/// One piece of the half-annulus boundary, parametrized over `[0, 1]`.
#[derive(Debug, Clone, Copy)]
enum Piece {
    /// `r·e^(iθ)` with θ running linearly from `from` to `to`.
    Arc { r: f64, from: f64, to: f64 },
    /// `±i·e^τ` with τ running linearly from `from` to `to`.
    Axis { upper: bool, from: f64, to: f64 },
}

impl Piece {
    fn at(&self, t: f64) -> Complex64 {
        match *self {
            Piece::Arc { r, from, to } => Complex64::from_polar(r, from + (to - from) * t),
            Piece::Axis { upper, from, to } => {
                let m = (from + (to - from) * t).exp();
                Complex64::new(0.0, if upper { m } else { -m })
            }
        }
    }
}

struct PieceWinding {
    phase: f64,
    samples: usize,
    depth: u32,
}

fn check_off_root(p: &CharParams, s: Complex64, value: Complex64) -> Result<()> {
    let magnitude = value.norm();
    if magnitude < 1e-12 * (1.0 + p.delta) || !magnitude.is_finite() {
        return Err(Error::ContourThroughRoot {
            re: s.re,
            im: s.im,
            magnitude,
        });
    }
    Ok(())
}

fn trace_piece(p: &CharParams, piece: Piece) -> Result<PieceWinding> {
    let eval = |t: f64| -> Result<Complex64> {
        let s = piece.at(t);
        let v = delta_eval(p, s);
        check_off_root(p, s, v)?;
        Ok(v)
    };

    let mut phase = 0.0;
    let mut samples = 1;
    let mut max_depth = 0;
    let mut prev_t = 0.0;
    let mut prev_v = eval(0.0)?;
    for i in 1..=INITIAL_SAMPLES {
        let t_end = i as f64 / INITIAL_SAMPLES as f64;
        // depth-first subdivision of [prev_t, t_end]
        let mut stack = vec![(t_end, eval(t_end)?, 0u32)];
        samples += 1;
        while let Some(&(t, v, depth)) = stack.last() {
            let step = (v / prev_v).arg();
            if step.abs() < PHASE_STEP {
                phase += step;
                prev_t = t;
                prev_v = v;
                stack.pop();
                continue;
            }
            if depth >= MAX_DOUBLINGS {
                // a phase jump that survives every doubling means Δ vanishes
                // between the two samples
                if step.abs() > FRAC_PI_2 {
                    let s = piece.at(0.5 * (prev_t + t));
                    return Err(Error::ContourThroughRoot {
                        re: s.re,
                        im: s.im,
                        magnitude: delta_eval(p, s).norm(),
                    });
                }
                return Err(Error::RefinementLimit(MAX_DOUBLINGS));
            }
            let mid = 0.5 * (prev_t + t);
            let mv = eval(mid)?;
            samples += 1;
            let child_depth = depth + 1;
            max_depth = max_depth.max(child_depth);
            // both halves sit one level deeper than the interval they split
            if let Some(top) = stack.last_mut() {
                top.2 = child_depth;
            }
            stack.push((mid, mv, child_depth));
        }
    }
    Ok(PieceWinding {
        phase,
        samples,
        depth: max_depth,
    })
}

/// Counts the roots of Δ with `Re s ≥ 0` (with multiplicity) from the winding
/// of Δ along the boundary of `{Re s ≥ 0, l·(1−10⁻³) ≤ |s| ≤ L·(1+10⁻³)}`.
pub fn count_unstable_roots(p: &CharParams) -> Result<RootCountReport> {
    let bounds = unstable_root_bounds(p)?;
    let r_in = bounds.lower * (1.0 - CONTOUR_MARGIN);
    let r_out = bounds.upper * (1.0 + CONTOUR_MARGIN);
    let (ln_in, ln_out) = (r_in.ln(), r_out.ln());

    // counterclockwise: outer arc up, axis down, inner arc back, axis up
    let pieces = [
        Piece::Arc {
            r: r_out,
            from: -FRAC_PI_2,
            to: FRAC_PI_2,
        },
        Piece::Axis {
            upper: true,
            from: ln_out,
            to: ln_in,
        },
        Piece::Arc {
            r: r_in,
            from: FRAC_PI_2,
            to: -FRAC_PI_2,
        },
        Piece::Axis {
            upper: false,
            from: ln_in,
            to: ln_out,
        },
    ];

    let traced = pieces
        .par_iter()
        .map(|&piece| trace_piece(p, piece))
        .collect::<Result<Vec<_>>>()?;

    let mut phase = 0.0;
    let mut samples = 0;
    let mut depth = 0;
    for (i, w) in traced.iter().enumerate() {
        phase += w.phase;
        samples += w.samples;
        depth = depth.max(w.depth);
        // junction between the end of this piece and the start of the next
        let next = &pieces[(i + 1) % pieces.len()];
        let end = delta_eval(p, pieces[i].at(1.0));
        let start = delta_eval(p, next.at(0.0));
        phase += (start / end).arg();
    }

    let turns = phase / (2.0 * PI);
    let n = turns.round();
    debug_assert!(
        (turns - n).abs() < 1e-6,
        "winding {turns} is not an integer"
    );
    Ok(RootCountReport {
        n_unstable: n.max(0.0) as usize,
        bounds,
        contour_samples: samples,
        winding_turns: turns,
        refinement_depth: depth,
    })
}

fn real_delta(p: &CharParams, t: f64) -> f64 {
    t.powf(p.q1 + p.q2) - p.a11 * t.powf(p.q2) - p.a22 * t.powf(p.q1) + p.delta
}

fn scan_range(p: &CharParams) -> (f64, f64) {
    match unstable_root_bounds(p) {
        Ok(b) => (0.5 * b.lower, 2.0 * b.upper),
        Err(_) => (1e-12, 1e12),
    }
}

/// Positive real roots of `t ↦ Δ(t)` located by sign changes on a
/// logarithmic grid and refined by bisection to `10⁻¹²` relative width.
pub fn positive_real_roots(p: &CharParams) -> Vec<f64> {
    const N: usize = 4096;
    let (lo, hi) = scan_range(p);
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let grid = |i: usize| (ln_lo + (ln_hi - ln_lo) * i as f64 / N as f64).exp();

    let mut roots = Vec::new();
    let mut t_prev = grid(0);
    let mut f_prev = real_delta(p, t_prev);
    for i in 1..=N {
        let t = grid(i);
        let f = real_delta(p, t);
        if f == 0.0 {
            roots.push(t);
        } else if f_prev != 0.0 && f.signum() != f_prev.signum() {
            roots.push(bisect_real(p, t_prev, t, f_prev));
        }
        t_prev = t;
        f_prev = f;
    }
    roots
}

fn bisect_real(p: &CharParams, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        let f = real_delta(p, mid);
        if f == 0.0 {
            return mid;
        }
        if f.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Whether Δ has a strictly positive real root.
///
/// `Δ(0⁺) = δ` and `Δ(t) → +∞`, so a non-positive value at any probe point
/// settles the question; otherwise the logarithmic scan decides.
pub fn has_positive_real_root(p: &CharParams) -> bool {
    if p.delta < 0.0 {
        return true;
    }
    let mut probes = vec![1.0];
    if p.a11 > 0.0 {
        probes.push(p.a11.powf(1.0 / p.q1));
    }
    if p.a22 > 0.0 {
        probes.push(p.a22.powf(1.0 / p.q2));
    }
    if probes.iter().any(|&t| real_delta(p, t) <= 0.0) {
        return true;
    }
    !positive_real_roots(p).is_empty()
}

/// Roots of Δ in the closed right half-plane located by a log-polar grid
/// search of `|Δ|` followed by Newton polishing in `w = ln s`.
///
/// The search window extends three e-folds beyond the modulus bounds on
/// both sides, so the result can be checked against them.
pub fn polish_unstable_roots(p: &CharParams) -> Result<Vec<Complex64>> {
    const RADIAL: usize = 600;
    const ANGULAR: usize = 97;
    let bounds = unstable_root_bounds(p)?;
    let (ln_lo, ln_hi) = (bounds.lower.ln() - 3.0, bounds.upper.ln() + 3.0);

    let rel = |w: Complex64| -> f64 {
        let e12 = (w * (p.q1 + p.q2)).exp();
        let e1 = (w * p.q1).exp();
        let e2 = (w * p.q2).exp();
        let v = e12 - e2 * p.a11 - e1 * p.a22 + p.delta;
        let scale = e12.norm() + p.a11.abs() * e2.norm() + p.a22.abs() * e1.norm() + p.delta;
        v.norm() / scale
    };
    let node = |i: usize, j: usize| {
        Complex64::new(
            ln_lo + (ln_hi - ln_lo) * i as f64 / (RADIAL - 1) as f64,
            -FRAC_PI_2 + PI * j as f64 / (ANGULAR - 1) as f64,
        )
    };
    let values: Vec<f64> = (0..RADIAL * ANGULAR)
        .map(|k| rel(node(k / ANGULAR, k % ANGULAR)))
        .collect();
    let at = |i: usize, j: usize| values[i * ANGULAR + j];

    let mut roots: Vec<Complex64> = Vec::new();
    for i in 0..RADIAL {
        for j in 0..ANGULAR {
            let v = at(i, j);
            let mut is_min = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0)
                        || ii < 0
                        || jj < 0
                        || ii >= RADIAL as i64
                        || jj >= ANGULAR as i64
                    {
                        continue;
                    }
                    if at(ii as usize, jj as usize) < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if !is_min {
                continue;
            }
            if let Some(w) = newton_log(p, node(i, j)) {
                if w.im.abs() <= FRAC_PI_2 + 1e-9
                    && !roots
                        .iter()
                        .any(|r| (r.ln() - w).norm() < 1e-7 * (1.0 + w.norm()))
                {
                    roots.push(w.exp());
                }
            }
        }
    }
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// Newton iteration on `F(w) = e^((q1+q2)w) − a11·e^(q2 w) − a22·e^(q1 w) + δ`,
/// which is Δ on the principal sheet `|Im w| < π`.
fn newton_log(p: &CharParams, mut w: Complex64) -> Option<Complex64> {
    for _ in 0..200 {
        let e12 = (w * (p.q1 + p.q2)).exp();
        let e1 = (w * p.q1).exp();
        let e2 = (w * p.q2).exp();
        let f = e12 - e2 * p.a11 - e1 * p.a22 + p.delta;
        let df = e12 * (p.q1 + p.q2) - e2 * (p.a11 * p.q2) - e1 * (p.a22 * p.q1);
        if df.norm() == 0.0 || !f.is_finite() {
            return None;
        }
        let mut step = f / df;
        if step.norm() > 1.0 {
            step = step / step.norm();
        }
        w -= step;
        if w.im.abs() > PI {
            return None;
        }
        if step.norm() <= 1e-14 * (1.0 + w.norm()) {
            let scale = e12.norm() + p.a11.abs() * e2.norm() + p.a22.abs() * e1.norm() + p.delta;
            let residual = f.norm() / scale;
            return (residual < 1e-9).then_some(w);
        }
    }
    None
}

/// `(k, n)` with `q = k/n` to within `10⁻¹²` and the smallest `n ≤ 64`.
pub fn rational_order(q: f64) -> Option<(u32, u32)> {
    (1..=64u32).find_map(|n| {
        let k = (q * n as f64).round();
        ((q - k / n as f64).abs() <= 1e-12 && k >= 1.0).then_some((k as u32, n))
    })
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A commensurate system `ᶜD^(1/n) z = B z` equivalent to a rational-order
/// two-dimensional system.
#[derive(Debug, Clone, PartialEq)]
pub struct CommensurateSystem {
    pub matrix: Array2<f64>,
    pub base_order: f64,
    pub denominator: u32,
}

impl CommensurateSystem {
    /// Eigenvalues from the LAPACK dense nonsymmetric solver.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let n = self.matrix.nrows();
        let ev = self.matrix.eigvals().map_err(|_| Error::NoConvergence(n))?;
        Ok(ev.iter().map(|l| Complex64::new(l.re, l.im)).collect())
    }

    /// Eigenvalues inside the sector `|Arg λ| ≤ π/(2n)`; each is `s^(1/n)`
    /// for a characteristic root `s` with `Re s ≥ 0`.
    pub fn unstable_eigenvalues(&self) -> Result<Vec<Complex64>> {
        let sector = FRAC_PI_2 / self.denominator as f64;
        Ok(self
            .eigenvalues()?
            .into_iter()
            .filter(|l| l.norm() > 0.0 && l.arg().abs() <= sector)
            .collect())
    }

    /// Sector criterion: stable iff every eigenvalue has `|Arg λ| > π/(2n)`.
    pub fn matignon_stable(&self) -> Result<bool> {
        let sector = FRAC_PI_2 / self.denominator as f64;
        Ok(self
            .eigenvalues()?
            .iter()
            .all(|l| l.norm() > 0.0 && l.arg().abs() > sector))
    }
}

/// Rewrites a system with orders `q1 = k1/n1`, `q2 = k2/n2` as an order-`1/n`
/// system, `n = lcm(n1, n2)`.
///
/// The state is `(x, D x, …, D^(K1−1) x, y, D y, …, D^(K2−1) y)` with
/// `D = ᶜD^(1/n)`, `K1 = q1·n`, `K2 = q2·n`.
pub fn commensurate_reduce(s: &SystemSpec, denominators: (u32, u32)) -> Result<CommensurateSystem> {
    let (n1, n2) = denominators;
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument(
            "denominators must be positive".into(),
        ));
    }
    let numerator = |q: f64, n: u32| -> Result<u32> {
        let k = (q * n as f64).round();
        if (q - k / n as f64).abs() > 1e-12 || k < 1.0 {
            return Err(Error::NotRational(q));
        }
        Ok(k as u32)
    };
    let k1 = numerator(s.q1(), n1)?;
    let k2 = numerator(s.q2(), n2)?;
    let n = n1 / gcd(n1, n2) * n2;
    if n > 64 {
        return Err(Error::NotRational(if n1 > 64 { s.q1() } else { s.q2() }));
    }
    let kx = (k1 * (n / n1)) as usize;
    let ky = (k2 * (n / n2)) as usize;
    let dim = kx + ky;
    if dim > 128 {
        return Err(Error::DimensionCap(dim));
    }

    let mut b = Array2::<f64>::zeros((dim, dim));
    for i in 0..dim - 1 {
        if i != kx - 1 {
            b[(i, i + 1)] = 1.0;
        }
    }
    b[(kx - 1, 0)] = s.a11();
    b[(kx - 1, kx)] = s.a12();
    b[(dim - 1, 0)] = s.a21();
    b[(dim - 1, kx)] = s.a22();
    Ok(CommensurateSystem {
        matrix: b,
        base_order: 1.0 / n as f64,
        denominator: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::char_eq::principal_pow;

    fn example(q1: f64, q2: f64) -> CharParams {
        CharParams::new(0.00001, 0.1, 0.00001 * 0.1 + 0.0022, q1, q2).unwrap()
    }

    #[test]
    fn zero_diagonal_bounds() {
        let p = CharParams::new(0.0, 0.0, 1.0, 0.3, 0.6).unwrap();
        let b = unstable_root_bounds(&p).unwrap();
        // q = 0.9/0.3 = 3, γ = 2
        assert!((b.gamma_const - 2.0).abs() < 1e-14);
        let alpha = 0.45;
        assert!((b.lower - (1.0 / 2f64.sqrt()).powf(1.0 / alpha)).abs() < 1e-12);
        assert!((b.upper - 2f64.sqrt().powf(1.0 / alpha)).abs() < 1e-12);
        assert!(b.contains(1.0));
        assert!((b.p - 1.5).abs() < 1e-15);
    }

    #[test]
    fn example_bounds_contain_companion_roots() {
        let b = unstable_root_bounds(&example(0.25, 0.5)).unwrap();
        for lam in [0.304593_f64, 0.0221182] {
            assert!(
                b.contains(lam.powi(4)),
                "{} not in [{}, {}]",
                lam.powi(4),
                b.lower,
                b.upper
            );
        }
    }

    #[test]
    fn bounds_need_positive_delta() {
        let p = CharParams::new(1.0, 1.0, -1.0, 0.5, 0.7).unwrap();
        assert!(matches!(
            unstable_root_bounds(&p),
            Err(Error::DeltaNotPositive(_))
        ));
        assert!(matches!(
            count_unstable_roots(&p),
            Err(Error::DeltaNotPositive(_))
        ));
    }

    #[test]
    fn anchor_point_has_no_unstable_roots() {
        let p = CharParams::new(-1.0, -1.0, 1.0, 0.5, 0.25).unwrap();
        let b = unstable_root_bounds(&p).unwrap();
        assert!(b.lower > 0.0 && b.upper.is_finite());
        let r = count_unstable_roots(&p).unwrap();
        assert_eq!(r.n_unstable, 0);
        assert!(!has_positive_real_root(&p));
    }

    #[test]
    fn example_counts() {
        let r = count_unstable_roots(&example(0.25, 0.5)).unwrap();
        assert_eq!(r.n_unstable, 2);
        assert!((r.winding_turns - 2.0).abs() < 1e-6);
        let r = count_unstable_roots(&example(0.5, 0.25)).unwrap();
        assert_eq!(r.n_unstable, 0);
    }

    #[test]
    fn classical_cases() {
        // s² + 3s + 2: roots −1, −2
        let p = CharParams::new(-1.5, -1.5, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(count_unstable_roots(&p).unwrap().n_unstable, 0);
        // s² − 3s + 2: roots 1, 2
        let p = CharParams::new(1.5, 1.5, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(count_unstable_roots(&p).unwrap().n_unstable, 2);
        // s² − 0.2s + 4: complex pair with positive real part
        let p = CharParams::new(0.1, 0.1, 4.0, 1.0, 1.0).unwrap();
        assert_eq!(count_unstable_roots(&p).unwrap().n_unstable, 2);
    }

    #[test]
    fn center_is_on_the_contour() {
        let p = CharParams::new(0.0, 0.0, 4.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            count_unstable_roots(&p),
            Err(Error::ContourThroughRoot { .. })
        ));
    }

    #[test]
    fn positive_real_root_examples() {
        let p = CharParams::new(0.3, -2.0, -1.0, 0.4, 0.8).unwrap();
        assert!(has_positive_real_root(&p));
        let p = CharParams::new(3.0, 3.0, 4.0, 0.7, 0.9).unwrap();
        assert!(has_positive_real_root(&p));
        for (q1, q2) in [(0.5, 0.25), (0.1, 1.0), (1.0, 1.0)] {
            let p = CharParams::new(-1.0, -1.0, 1.0, q1, q2).unwrap();
            assert!(!has_positive_real_root(&p));
        }
        let roots = positive_real_roots(&example(0.25, 0.5));
        assert_eq!(roots.len(), 2);
        assert!((roots[0].powf(0.25) - 0.0221182).abs() < 1e-6);
        assert!((roots[1].powf(0.25) - 0.304593).abs() < 1e-6);
    }

    #[test]
    fn polished_roots_of_example() {
        let roots = polish_unstable_roots(&example(0.25, 0.5)).unwrap();
        assert_eq!(roots.len(), 2, "{roots:?}");
        for r in &roots {
            assert!(r.im.abs() < 1e-12);
            assert!(delta_eval(&example(0.25, 0.5), *r).norm() < 1e-12);
        }
        assert!(polish_unstable_roots(&example(0.5, 0.25))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn reduces_example_to_three_dimensions() {
        let s = SystemSpec::new(0.00001, 1.0, -0.0022, 0.1, 0.25, 0.5).unwrap();
        let sys = commensurate_reduce(&s, (4, 2)).unwrap();
        let expect = ndarray::arr2(&[[0.00001, 1.0, 0.0], [0.0, 0.0, 1.0], [-0.0022, 0.1, 0.0]]);
        assert_eq!(sys.matrix, expect);
        assert_eq!(sys.base_order, 0.25);
        let mut ev: Vec<f64> = sys
            .eigenvalues()
            .unwrap()
            .iter()
            .map(|l| {
                assert!(l.im.abs() < 1e-12);
                l.re
            })
            .collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([-0.326701, 0.0221182, 0.304593]) {
            assert!((got - want).abs() < 1e-5, "{got} vs {want}");
        }
        assert!(!sys.matignon_stable().unwrap());
        assert_eq!(sys.unstable_eigenvalues().unwrap().len(), 2);
    }

    #[test]
    fn classical_reduction_is_identity() {
        let s = SystemSpec::new(-1.0, 2.0, -3.0, 0.5, 1.0, 1.0).unwrap();
        let sys = commensurate_reduce(&s, (1, 1)).unwrap();
        assert_eq!(sys.matrix, ndarray::arr2(&[[-1.0, 2.0], [-3.0, 0.5]]));
        assert_eq!(sys.base_order, 1.0);
        assert!(sys.matignon_stable().unwrap());
    }

    #[test]
    fn companion_polynomial_matches_delta() {
        // eigenvalues λ of B satisfy Δ(λ^n) evaluated on the λ-sheet = 0:
        // λ^(K1+K2) − a11 λ^K2 − a22 λ^K1 + δ = 0
        let s = SystemSpec::new(0.7, -1.2, 0.9, -0.4, 2.0 / 3.0, 0.5).unwrap();
        let sys = commensurate_reduce(&s, (3, 2)).unwrap();
        assert_eq!(sys.denominator, 6);
        assert_eq!(sys.matrix.nrows(), 7);
        for l in sys.eigenvalues().unwrap() {
            let v = l.powu(7) - l.powu(3) * s.a11() - l.powu(4) * s.a22() + s.delta();
            assert!(v.norm() < 1e-10, "{v}");
        }
        // the unstable sector eigenvalues map to genuine principal-branch roots
        let p = s.char_params();
        for l in sys.unstable_eigenvalues().unwrap() {
            let root = principal_pow(l, 6.0);
            assert!(delta_eval(&p, root).norm() < 1e-8);
        }
    }

    #[test]
    fn cycling_companion_still_converges() {
        let s = SystemSpec::new(-0.585086, 1.0, -1.513766, -2.517698, 1.0, 1.0).unwrap();
        let sys = commensurate_reduce(&s, (3, 2)).unwrap();
        let ev = sys.eigenvalues().unwrap();
        assert_eq!(ev.len(), 12);
        for l in ev {
            let v = l.powu(12) - l.powu(6) * (s.a11() + s.a22()) + s.delta();
            assert!(v.norm() < 1e-9, "{v}");
        }
    }

    #[test]
    fn reduction_errors() {
        let s = SystemSpec::new(1.0, 0.0, 0.0, 1.0, 0.3001, 0.5).unwrap();
        assert!(matches!(
            commensurate_reduce(&s, (10, 2)),
            Err(Error::NotRational(_))
        ));
        let s = SystemSpec::new(1.0, 0.0, 0.0, 1.0, 1.0 / 61.0, 1.0 / 59.0).unwrap();
        assert!(matches!(
            commensurate_reduce(&s, (61, 59)),
            Err(Error::NotRational(_))
        ));
        assert_eq!(rational_order(0.25), Some((1, 4)));
        assert_eq!(rational_order(2.0 / 3.0), Some((2, 3)));
        assert_eq!(rational_order(0.123456789), None);
    }
}
