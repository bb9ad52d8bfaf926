//! Declared coefficient bounds placing a problem in the dissipative class.
//!
//! `alpha` is the one-sided Lipschitz bound of the drift in the present
//! state (may be negative — that is the dissipative case), `beta[j]` the
//! Lipschitz bound of the drift in the j-th delayed argument, and `gamma1`,
//! `gamma2[j]` the Lipschitz bounds of the diffusion in present and delayed
//! arguments.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub alpha: f64,
    pub beta: Vec<f64>,
    pub gamma1: f64,
    pub gamma2: Vec<f64>,
}

impl CoefficientSet {
    pub fn new(alpha: f64, beta: Vec<f64>, gamma1: f64, gamma2: Vec<f64>) -> Result<Self> {
        if beta.is_empty() || beta.len() != gamma2.len() {
            return Err(Error::Parameter(format!(
                "need one beta and one gamma2 per delay (>= 1), got {} and {}",
                beta.len(),
                gamma2.len()
            )));
        }
        if !alpha.is_finite() || !gamma1.is_finite() {
            return Err(Error::Parameter("coefficients must be finite".into()));
        }
        if gamma1 < 0.0
            || beta.iter().any(|&b| !b.is_finite() || b < 0.0)
            || gamma2.iter().any(|&g| !g.is_finite() || g < 0.0)
        {
            return Err(Error::Parameter(
                "beta, gamma1 and gamma2 must all be >= 0".into(),
            ));
        }
        Ok(Self {
            alpha,
            beta,
            gamma1,
            gamma2,
        })
    }

    /// Single-delay convenience constructor.
    pub fn single(alpha: f64, beta: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        Self::new(alpha, vec![beta], gamma1, vec![gamma2])
    }

    /// Number of delayed arguments.
    pub fn delays(&self) -> usize {
        self.beta.len()
    }

    pub fn beta_sum(&self) -> f64 {
        self.beta.iter().sum()
    }

    pub fn gamma2_sum(&self) -> f64 {
        self.gamma2.iter().sum()
    }
}
