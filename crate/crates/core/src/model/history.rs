//! Dense histories on `[a - τ, ·]` and the `1/n` freezing transform.
//!
//! Freezing a history at `t - 1/n` — identical values up to the cutoff, the
//! cutoff value held constant beyond it — turns a problem with vanishing
//! lags into one whose lag is bounded below by `1/n`. The transform is what
//! lets a single analysis cover constant, proportional and piecewise
//! constant delay arguments alike.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::StateVector;

/// A continuous state history: a mapping `u ↦ ψ(u)` for `u ≥ start`,
/// together with the lag bound `tau_max` of the owning problem.
#[derive(Clone)]
pub struct DenseHistory {
    start: f64,
    tau_max: f64,
    eval: Arc<dyn Fn(f64) -> StateVector + Send + Sync>,
}

impl DenseHistory {
    pub fn new(
        start: f64,
        tau_max: f64,
        eval: Arc<dyn Fn(f64) -> StateVector + Send + Sync>,
    ) -> Self {
        Self {
            start,
            tau_max,
            eval,
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn eval(&self, u: f64) -> StateVector {
        (self.eval)(u)
    }
}

/// The frozen history `ψ^(n,t)`: equal to `ψ(u)` for `u ≤ t - 1/n` and held
/// at `ψ(t - 1/n)` for `u > t - 1/n`. Requires `n > 1/tau_max`.
pub fn perturb_history(history: &DenseHistory, n: u32, t: f64) -> Result<DenseHistory> {
    if history.tau_max <= 0.0 || f64::from(n) <= 1.0 / history.tau_max {
        return Err(Error::Parameter(format!(
            "perturbation index n = {n} must exceed 1/tau_max = {}",
            if history.tau_max > 0.0 {
                (1.0 / history.tau_max).to_string()
            } else {
                "inf (tau_max = 0)".to_string()
            }
        )));
    }
    let cutoff = t - 1.0 / f64::from(n);
    let inner = Arc::clone(&history.eval);
    Ok(DenseHistory {
        start: history.start,
        tau_max: history.tau_max,
        eval: Arc::new(move |u: f64| inner(u.min(cutoff))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_history() -> DenseHistory {
        // ψ(u) = u on [-1, ∞)
        DenseHistory::new(-1.0, 1.0, Arc::new(|u| StateVector::scalar(u)))
    }

    #[test]
    fn left_branch_unchanged() {
        let h = ramp_history();
        let p = perturb_history(&h, 4, 0.5).unwrap();
        // cutoff = 0.25; u = 0.24 stays as-is
        assert_eq!(p.eval(0.24), h.eval(0.24));
    }

    #[test]
    fn right_branch_frozen_at_cutoff() {
        let h = ramp_history();
        let p = perturb_history(&h, 4, 0.5).unwrap();
        assert_eq!(p.eval(0.5), h.eval(0.25));
        assert_eq!(p.eval(10.0), h.eval(0.25));
    }

    #[test]
    fn constant_history_unaffected() {
        let h = DenseHistory::new(-1.0, 1.0, Arc::new(|_| StateVector::scalar(3.0)));
        let p = perturb_history(&h, 10, 0.7).unwrap();
        for u in [-1.0, 0.0, 0.69, 0.7, 2.0] {
            assert_eq!(p.eval(u), StateVector::scalar(3.0));
        }
    }

    #[test]
    fn idempotent_at_fixed_n_and_t() {
        let h = ramp_history();
        let once = perturb_history(&h, 8, 0.3).unwrap();
        let twice = perturb_history(&once, 8, 0.3).unwrap();
        for k in 0..200 {
            let u = -1.0 + 0.02 * f64::from(k);
            assert_eq!(once.eval(u), twice.eval(u), "at u = {u}");
        }
    }

    #[test]
    fn agrees_with_original_up_to_cutoff() {
        let h = ramp_history();
        let n = 5;
        let t = 0.9;
        let cutoff = t - 1.0 / f64::from(n);
        let p = perturb_history(&h, n, t).unwrap();
        for k in 0..500 {
            let u = -1.0 + (cutoff + 1.0) * f64::from(k) / 500.0;
            assert_eq!(p.eval(u), h.eval(u), "at u = {u}");
        }
    }

    #[test]
    fn small_n_rejected() {
        let h = DenseHistory::new(-0.1, 0.1, Arc::new(|u| StateVector::scalar(u)));
        // 1/tau_max = 10, so n = 10 is not enough
        assert!(perturb_history(&h, 10, 0.5).is_err());
        assert!(perturb_history(&h, 11, 0.5).is_ok());
    }

    #[test]
    fn zero_tau_rejected() {
        let h = DenseHistory::new(0.0, 0.0, Arc::new(|u| StateVector::scalar(u)));
        assert!(perturb_history(&h, 1000, 0.5).is_err());
    }
}
