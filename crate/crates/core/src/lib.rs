//! Simulation and mean-square stability analysis of nonlinear stochastic
//! delay differential equations (SDDEs)
//!
//! ```text
//! dx(t) = f(t, x(t), x(t-τ₁(t)), …, x(t-τ_r(t))) dt
//!       + g(t, x(t), x(t-τ₁(t)), …, x(t-τ_r(t))) dw(t),   t ∈ [a, b],
//!  x(t) = ξ(t),                                            t ∈ [a-τ, a],
//! ```
//!
//! with drift `f` one-sided Lipschitz in the present state (constant `α`),
//! Lipschitz in each delayed argument (constants `β_j`), and diffusion `g`
//! Lipschitz with constants `γ₁`, `γ₂_j`. Delays may be constant,
//! proportional (`t - τ(t) = q·t`), piecewise constant (`⌊t - i⌋`) or
//! tabulated; bounded or unbounded.
//!
//! The crate provides:
//!
//! * [`model`] — the problem description: states, delays, initial segments,
//!   declared coefficient bounds, and probe-based validation of those bounds;
//! * [`analysis`] — contraction/stability constants, classification,
//!   admissible stepsizes, bound envelopes, and the node sequences used for
//!   blockwise geometric decay;
//! * [`integrator`] — reproducible Wiener increments, the drift-implicit
//!   backward Euler scheme with piecewise-linear dense history, and coupled
//!   trajectory pairs driven by common noise;
//! * [`montecarlo`] — ensemble estimates of `E|X_n - Y_n|²` with standard
//!   errors, envelope checks, an exact second-moment oracle for the linear
//!   no-delay case, and strong-order measurement;
//! * [`families`] — the builtin parametric problem families.

pub mod analysis;
pub mod error;
pub mod families;
pub mod integrator;
pub mod model;
pub mod montecarlo;

pub use error::{Error, Result};
