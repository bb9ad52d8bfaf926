//! Deterministic initial segments `ξ(t)` on `[a - τ, a]`.

use crate::error::{Error, Result};
use crate::model::StateVector;

/// Builtin segment families. All are finite on any bounded domain.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentShape {
    Constant(StateVector),
    /// `Σ_k coeffs[k] · t^k`, evaluated by Horner's rule.
    Polynomial(Vec<StateVector>),
    /// `amplitude · sin(ω·t + phase) + offset`, componentwise amplitude.
    Sinusoid {
        amplitude: StateVector,
        omega: f64,
        phase: f64,
        offset: StateVector,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSegment {
    t_lo: f64,
    t_hi: f64,
    shape: SegmentShape,
}

/// Slack for domain checks, covering roundoff in delayed-time arithmetic.
fn domain_eps(t: f64) -> f64 {
    1e-9 * (1.0 + t.abs())
}

impl InitialSegment {
    pub fn new(t_lo: f64, t_hi: f64, shape: SegmentShape) -> Result<Self> {
        if !(t_lo.is_finite() && t_hi.is_finite()) || t_lo > t_hi {
            return Err(Error::Parameter(format!(
                "initial segment domain [{t_lo}, {t_hi}] is not a valid interval"
            )));
        }
        let seg = Self { t_lo, t_hi, shape };
        if seg.dim() == 0 {
            return Err(Error::Parameter("initial segment has dimension 0".into()));
        }
        Ok(seg)
    }

    pub fn constant(t_lo: f64, t_hi: f64, value: StateVector) -> Result<Self> {
        Self::new(t_lo, t_hi, SegmentShape::Constant(value))
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.t_lo, self.t_hi)
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            SegmentShape::Constant(v) => v.dim(),
            SegmentShape::Polynomial(c) => c.first().map_or(0, StateVector::dim),
            SegmentShape::Sinusoid { amplitude, .. } => amplitude.dim(),
        }
    }

    /// ξ(t). Times outside `[t_lo, t_hi]` (beyond roundoff slack) are errors.
    pub fn eval(&self, t: f64) -> Result<StateVector> {
        if t < self.t_lo - domain_eps(t) || t > self.t_hi + domain_eps(t) {
            return Err(Error::OutOfDomain {
                t,
                lo: self.t_lo,
                hi: self.t_hi,
            });
        }
        let t = t.clamp(self.t_lo, self.t_hi);
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> StateVector {
        match &self.shape {
            SegmentShape::Constant(v) => v.clone(),
            SegmentShape::Polynomial(coeffs) => {
                let dim = coeffs[0].dim();
                let mut acc = StateVector::zeros(dim);
                for c in coeffs.iter().rev() {
                    acc = acc.scale(t).add(c);
                }
                acc
            }
            SegmentShape::Sinusoid {
                amplitude,
                omega,
                phase,
                offset,
            } => amplitude.scale((omega * t + phase).sin()).add(offset),
        }
    }
}
