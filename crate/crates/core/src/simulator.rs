//! Fractional Adams predictor-corrector for
//! `ᶜD^q1 x = a11 x + a12 y`, `ᶜD^q2 y = a21 x + a22 y`.
//!
//! One PECE sweep per step with the full memory term: product-rectangle
//! weights for the predictor, product-trapezoidal weights for the corrector.
//! Each component uses its own order.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::char_eq::SystemSpec;
use crate::error::{Error, Result};

pub const MAX_STEPS: usize = 200_000;
pub const OVERFLOW_LIMIT: f64 = 1e300;
const UNDERFLOW_GUARD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 2]>,
    pub step: f64,
    pub method_order_note: String,
    /// Set when a component exceeded `1e300` and integration stopped there.
    pub terminated_early: bool,
}

impl Trajectory {
    pub fn norms(&self) -> Vec<f64> {
        self.states.iter().map(|s| s[0].hypot(s[1])).collect()
    }

    pub fn final_norm(&self) -> f64 {
        self.states.last().map_or(0.0, |s| s[0].hypot(s[1]))
    }

    /// Overflow, or a final-quarter peak above the peak of the quarter before.
    pub fn growth_flagged(&self) -> bool {
        if self.terminated_early {
            return true;
        }
        let norms = self.norms();
        let n = norms.len();
        if n < 8 {
            return false;
        }
        let peak = |r: std::ops::Range<usize>| norms[r].iter().copied().fold(0.0, f64::max);
        peak(3 * n / 4..n) > peak(n / 2..3 * n / 4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub slope: f64,
    pub tail_fraction: f64,
    pub r_squared: f64,
}

struct Weights {
    /// `(k+1)^q − k^q`
    predictor: Vec<f64>,
    /// `(k+1)^(q+1) − 2k^(q+1) + (k−1)^(q+1)` for `k ≥ 1`; index 0 unused
    corrector: Vec<f64>,
    q: f64,
    pred_scale: f64,
    corr_scale: f64,
}

impl Weights {
    fn new(q: f64, h: f64, n: usize) -> Self {
        let pw = |k: usize| (k as f64).powf(q);
        let cw = |k: usize| (k as f64).powf(q + 1.0);
        let predictor = (0..=n).map(|k| pw(k + 1) - pw(k)).collect();
        let corrector = (0..=n)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    cw(k + 1) - 2.0 * cw(k) + cw(k - 1)
                }
            })
            .collect();
        Self {
            predictor,
            corrector,
            q,
            pred_scale: h.powf(q) / gamma(q + 1.0),
            corr_scale: h.powf(q) / gamma(q + 2.0),
        }
    }

    /// Predictor memory sum and corrector memory sum for step `n → n+1`,
    /// given the right-hand-side history `f[0..=n]`.
    fn memory(&self, f: &[f64], n: usize) -> (f64, f64) {
        let mut pred = 0.0;
        let mut corr = 0.0;
        // j = n − k runs from n down to 1
        for (k, &fj) in f[1..=n].iter().rev().enumerate() {
            pred += self.predictor[k] * fj;
            corr += self.corrector[k + 1] * fj;
        }
        pred += self.predictor[n] * f[0];
        let nf = n as f64;
        corr += (nf.powf(self.q + 1.0) - (nf - self.q) * (nf + 1.0).powf(self.q)) * f[0];
        (pred, corr)
    }
}

/// Integrates on the uniform grid `t_k = k·h`, `k = 0..=⌈t_end/h⌉`.
pub fn integrate(s: &SystemSpec, x0: [f64; 2], t_end: f64, h: f64) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {h}"
        )));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument(
            "initial state must be finite".into(),
        ));
    }
    let ratio = t_end / h;
    if ratio > MAX_STEPS as f64 {
        return Err(Error::StepCap(ratio.ceil().min(usize::MAX as f64) as usize));
    }
    // absorb rounding so t_end = 1, h = 0.1 gives exactly 10 steps
    let steps = ((ratio - 1e-9).ceil() as usize).max(1);

    let [[a11, a12], [a21, a22]] = s.matrix();
    let w1 = Weights::new(s.q1(), h, steps);
    let w2 = Weights::new(s.q2(), h, steps);

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut f1 = Vec::with_capacity(steps + 1);
    let mut f2 = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(x0);
    f1.push(a11 * x0[0] + a12 * x0[1]);
    f2.push(a21 * x0[0] + a22 * x0[1]);

    let mut terminated_early = false;
    for n in 0..steps {
        let (p1, c1) = w1.memory(&f1, n);
        let (p2, c2) = w2.memory(&f2, n);
        let xp = x0[0] + w1.pred_scale * p1;
        let yp = x0[1] + w2.pred_scale * p2;
        let fp1 = a11 * xp + a12 * yp;
        let fp2 = a21 * xp + a22 * yp;
        let x = x0[0] + w1.corr_scale * (fp1 + c1);
        let y = x0[1] + w2.corr_scale * (fp2 + c2);
        if !(x.abs() <= OVERFLOW_LIMIT && y.abs() <= OVERFLOW_LIMIT) {
            terminated_early = true;
            break;
        }
        times.push((n + 1) as f64 * h);
        states.push([x, y]);
        f1.push(a11 * x + a12 * y);
        f2.push(a21 * x + a22 * y);
    }

    Ok(Trajectory {
        times,
        states,
        step: h,
        method_order_note: format!(
            "fractional Adams PECE, full memory, orders ({}, {}); global order min(2, 1+q)",
            s.q1(),
            s.q2()
        ),
        terminated_early,
    })
}

/// Least-squares slope of `ln‖state‖` against `ln t` over the final
/// `tail_fraction` of the samples.
pub fn estimate_decay(traj: &Trajectory, tail_fraction: f64) -> Result<DecayEstimate> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.9) {
        return Err(Error::InvalidArgument(format!(
            "tail fraction must lie in (0, 0.9], got {tail_fraction}"
        )));
    }
    let norms = traj.norms();
    let initial_norm = norms.first().copied().unwrap_or(0.0);
    let final_norm = norms.last().copied().unwrap_or(0.0);
    if traj.terminated_early || !(final_norm < initial_norm) {
        return Err(Error::NotDecaying {
            initial_norm,
            final_norm,
        });
    }

    fit_log_slope(traj, tail_fraction)
}

/// Log-log tail fit without the decay precondition; useful for diagnosing
/// trajectories still in their pre-asymptotic transient.
pub fn fit_log_slope(traj: &Trajectory, tail_fraction: f64) -> Result<DecayEstimate> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.9) {
        return Err(Error::InvalidArgument(format!(
            "tail fraction must lie in (0, 0.9], got {tail_fraction}"
        )));
    }
    let norms = traj.norms();
    let start = ((norms.len() as f64) * (1.0 - tail_fraction)).floor() as usize;
    let (xs, ys): (Vec<f64>, Vec<f64>) = traj.times[start..]
        .iter()
        .zip(&norms[start..])
        .filter(|&(&t, &r)| t > 0.0 && r > UNDERFLOW_GUARD)
        .map(|(&t, &r)| (t.ln(), r.ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "too few tail samples for a fit".into(),
        ));
    }

    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Ok(DecayEstimate {
        slope,
        tail_fraction,
        r_squared,
    })
}
