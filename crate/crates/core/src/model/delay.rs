//! Delay arguments `t ↦ t - τ(t)`.
//!
//! Supported shapes: constant lag, proportional ("pantograph") lag with
//! `t - τ(t) = q·t`, piecewise constant argument `⌊t - i⌋`, and a tabulated
//! lag with linear interpolation between samples. Every delayed time
//! satisfies `t - τ(t) ≤ t`, and over an integration window `[a, b]` it
//! never drops below `a - tau_max`, which bounds the initial segment.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DelayKind {
    /// `t - τ_c` with a fixed lag `τ_c ≥ 0`.
    Constant(f64),
    /// `t - τ(t) = q·t` with `q ∈ (0, 1)`; the lag `(1-q)·t` is unbounded.
    Pantograph(f64),
    /// `⌊t - i⌋` for a nonnegative integer shift `i`.
    PiecewiseConstant(u32),
    /// Lag `τ(t)` sampled at increasing times, linearly interpolated and
    /// held constant outside the sampled range.
    Tabulated { times: Vec<f64>, lags: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelaySpec {
    pub kind: DelayKind,
    /// Bound on how far the delayed time reaches below the window start.
    pub tau_max: f64,
}

impl DelaySpec {
    pub fn constant(tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::Parameter(format!(
                "constant delay must be finite and >= 0, got {tau}"
            )));
        }
        Ok(Self {
            kind: DelayKind::Constant(tau),
            tau_max: tau,
        })
    }

    /// Proportional delay on a window starting at `a >= 0`.
    pub fn pantograph(q: f64, a: f64) -> Result<Self> {
        if !(0.0 < q && q < 1.0) {
            return Err(Error::Parameter(format!(
                "pantograph ratio must lie in (0, 1), got {q}"
            )));
        }
        if a < 0.0 {
            return Err(Error::Parameter(format!(
                "pantograph delay requires a window start >= 0, got {a}"
            )));
        }
        Ok(Self {
            kind: DelayKind::Pantograph(q),
            // delayed times reach down to q·a, i.e. (1-q)·a below the start
            tau_max: (1.0 - q) * a,
        })
    }

    pub fn piecewise_constant(i: u32, a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::Parameter(format!("window start must be finite, got {a}")));
        }
        Ok(Self {
            kind: DelayKind::PiecewiseConstant(i),
            tau_max: a - (a - f64::from(i)).floor(),
        })
    }

    /// Tabulated lag; `times` strictly increasing, `lags` nonnegative.
    /// `tau_max` is taken over the window `[a, b]`.
    pub fn tabulated(times: Vec<f64>, lags: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        if times.len() != lags.len() || times.len() < 2 {
            return Err(Error::Parameter(
                "tabulated delay needs matching times/lags with at least two samples".into(),
            ));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter(
                "tabulated delay times must be strictly increasing".into(),
            ));
        }
        if lags.iter().any(|&l| !l.is_finite() || l < 0.0) {
            return Err(Error::Parameter(
                "tabulated lags must be finite and >= 0".into(),
            ));
        }
        // The lag is piecewise linear, so its maximum over [a, b] is attained
        // at a knot inside the window or at the window endpoints.
        let kind = DelayKind::Tabulated {
            times: times.clone(),
            lags: lags.clone(),
        };
        let mut max_lag = f64::max(lag_at(&times, &lags, a), lag_at(&times, &lags, b));
        for (t, l) in times.iter().zip(&lags) {
            if *t >= a && *t <= b {
                max_lag = max_lag.max(*l);
            }
        }
        Ok(Self {
            kind,
            tau_max: max_lag,
        })
    }

    /// The delayed time `t - τ(t)`.
    pub fn delayed_time(&self, t: f64) -> f64 {
        match &self.kind {
            DelayKind::Constant(tau) => t - tau,
            DelayKind::Pantograph(q) => q * t,
            DelayKind::PiecewiseConstant(i) => (t - f64::from(*i)).floor(),
            DelayKind::Tabulated { times, lags } => t - lag_at(times, lags, t),
        }
    }

    /// Whether `t - τ(t) → ∞` holds, the hypothesis behind blockwise decay.
    /// True for the closed-form kinds; tabulated delays are only certified by
    /// scanning the actual window.
    pub fn delayed_time_diverges(&self) -> bool {
        !matches!(self.kind, DelayKind::Tabulated { .. })
    }
}

fn lag_at(times: &[f64], lags: &[f64], t: f64) -> f64 {
    if t <= times[0] {
        return lags[0];
    }
    if t >= times[times.len() - 1] {
        return lags[lags.len() - 1];
    }
    // partition_point: first index with times[i] > t, so the segment is [idx-1, idx]
    let idx = times.partition_point(|&s| s <= t);
    let (t0, t1) = (times[idx - 1], times[idx]);
    let (l0, l1) = (lags[idx - 1], lags[idx]);
    let w = (t - t0) / (t1 - t0);
    l0 + w * (l1 - l0)
}
