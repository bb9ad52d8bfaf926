//! Uniform time grid `t_i = a + i·h`, `h = (b - a)/N`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    steps: usize,
    h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, steps: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::Parameter(format!(
                "grid window [{a}, {b}] must be a nonempty finite interval"
            )));
        }
        if steps == 0 {
            return Err(Error::Parameter("grid needs at least one step".into()));
        }
        let h = (b - a) / steps as f64;
        if !(h > 0.0) {
            return Err(Error::Parameter(format!("degenerate stepsize h = {h}")));
        }
        Ok(Self { a, b, steps, h })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `t_i = a + i·h`.
    pub fn node(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h
    }
}
