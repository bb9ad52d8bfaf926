//! Builtin problem families.
//!
//! Drift and diffusion are only ever supplied through these parametric
//! constructors — the coefficient bounds then come out automatically and the
//! configuration surface stays closed. Each constructor returns a
//! [`ProblemSpec`] whose declared bounds hold by construction:
//!
//! * [`scalar_linear`] — `dx = (A₁x + A₂y + F)dt + (B₁x + B₂y + G)dw` with
//!   complex scalar coefficients and one delayed argument `y`;
//! * [`scalar_linear_two_delays`] — the same shape with two delayed
//!   arguments, exercising the several-delay aggregation;
//! * [`nonlinear`] — `dx = (A₁x + A₂x³ + A₃√(y²+1) + F)dt +
//!   (B₁·sin x + B₂·arctan y + G)dw`, real-valued, with `A₂ ≤ 0` making the
//!   cubic term dissipative;
//! * [`pure_sde`] — `dx = A₁x dt + B₁x dw` with no delay dependence, the
//!   classical geometric test equation.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    CoefficientSet, ComplexMatrix, DelaySpec, DiffusionFn, DriftFn, InitialSegment, ProblemSpec,
    StateVector, TimeWindow,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLinearParams {
    pub a1: Complex64,
    pub a2: Complex64,
    pub b1: Complex64,
    pub b2: Complex64,
    /// Constant drift forcing `F`.
    pub forcing_drift: Complex64,
    /// Constant diffusion forcing `G`.
    pub forcing_diffusion: Complex64,
}

impl ScalarLinearParams {
    pub fn real(a1: f64, a2: f64, b1: f64, b2: f64) -> Self {
        Self {
            a1: Complex64::new(a1, 0.0),
            a2: Complex64::new(a2, 0.0),
            b1: Complex64::new(b1, 0.0),
            b2: Complex64::new(b2, 0.0),
            forcing_drift: Complex64::ZERO,
            forcing_diffusion: Complex64::ZERO,
        }
    }
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    if values
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::Parameter("family parameters must be finite".into()));
    }
    Ok(())
}

/// Scalar linear equation with one delayed argument. Bounds:
/// `α = Re A₁`, `β = |A₂|`, `γ₁ = |B₁|`, `γ₂ = |B₂|`.
pub fn scalar_linear(
    params: ScalarLinearParams,
    delay: DelaySpec,
    initial: InitialSegment,
    window: TimeWindow,
) -> Result<ProblemSpec> {
    check_finite(&[
        params.a1,
        params.a2,
        params.b1,
        params.b2,
        params.forcing_drift,
        params.forcing_diffusion,
    ])?;
    let p = params;
    let drift: DriftFn = Arc::new(move |_t, x, ys| {
        StateVector::new(vec![
            p.a1 * x.entry(0) + p.a2 * ys[0].entry(0) + p.forcing_drift,
        ])
    });
    let diffusion: DiffusionFn = Arc::new(move |_t, x, ys| {
        ComplexMatrix::scalar(p.b1 * x.entry(0) + p.b2 * ys[0].entry(0) + p.forcing_diffusion)
    });
    let spec = ProblemSpec {
        dimension: 1,
        wiener_dimension: 1,
        drift,
        diffusion,
        delays: vec![delay],
        initial,
        coeffs: CoefficientSet::single(
            params.a1.re,
            params.a2.norm(),
            params.b1.norm(),
            params.b2.norm(),
        )?,
        window,
        real_state: false,
    };
    spec.check_shape()?;
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoDelayLinearParams {
    pub a1: f64,
    pub a2: [f64; 2],
    pub b1: f64,
    pub b2: [f64; 2],
}

/// Scalar linear equation with two delayed arguments.
pub fn scalar_linear_two_delays(
    params: TwoDelayLinearParams,
    delays: [DelaySpec; 2],
    initial: InitialSegment,
    window: TimeWindow,
) -> Result<ProblemSpec> {
    let p = params;
    if ![p.a1, p.a2[0], p.a2[1], p.b1, p.b2[0], p.b2[1]]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(Error::Parameter("family parameters must be finite".into()));
    }
    let drift: DriftFn = Arc::new(move |_t, x, ys| {
        StateVector::new(vec![
            x.entry(0) * p.a1 + ys[0].entry(0) * p.a2[0] + ys[1].entry(0) * p.a2[1],
        ])
    });
    let diffusion: DiffusionFn = Arc::new(move |_t, x, ys| {
        ComplexMatrix::scalar(
            x.entry(0) * p.b1 + ys[0].entry(0) * p.b2[0] + ys[1].entry(0) * p.b2[1],
        )
    });
    let spec = ProblemSpec {
        dimension: 1,
        wiener_dimension: 1,
        drift,
        diffusion,
        delays: delays.to_vec(),
        initial,
        coeffs: CoefficientSet::new(
            p.a1,
            vec![p.a2[0].abs(), p.a2[1].abs()],
            p.b1.abs(),
            vec![p.b2[0].abs(), p.b2[1].abs()],
        )?,
        window,
        real_state: false,
    };
    spec.check_shape()?;
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearParams {
    pub a1: f64,
    /// Cubic coefficient; must be `<= 0` so the term is dissipative.
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub forcing_drift: f64,
    pub forcing_diffusion: f64,
}

/// Real scalar nonlinear equation
/// `dx = (A₁x + A₂x³ + A₃√(y²+1) + F)dt + (B₁·sin x + B₂·arctan y + G)dw`.
///
/// The drift is one-sided Lipschitz but not globally Lipschitz in `x`:
/// `(x₁³ - x₂³)(x₁ - x₂) ≥ 0` makes the cubic contribution nonpositive for
/// `A₂ ≤ 0`, so `α = A₁`. `√(y² + 1)`, `sin` and `arctan` are 1-Lipschitz,
/// giving `β = |A₃|`, `γ₁ = |B₁|`, `γ₂ = |B₂|`.
pub fn nonlinear(
    params: NonlinearParams,
    delay: DelaySpec,
    initial: InitialSegment,
    window: TimeWindow,
) -> Result<ProblemSpec> {
    let p = params;
    if ![p.a1, p.a2, p.a3, p.b1, p.b2, p.forcing_drift, p.forcing_diffusion]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(Error::Parameter("family parameters must be finite".into()));
    }
    if p.a2 > 0.0 {
        return Err(Error::Parameter(format!(
            "the cubic coefficient must be <= 0 for a one-sided bound, got {}",
            p.a2
        )));
    }
    let drift: DriftFn = Arc::new(move |_t, x, ys| {
        let x = x.entry(0).re;
        let y = ys[0].entry(0).re;
        StateVector::scalar(p.a1 * x + p.a2 * x * x * x + p.a3 * (y * y + 1.0).sqrt() + p.forcing_drift)
    });
    let diffusion: DiffusionFn = Arc::new(move |_t, x, ys| {
        let x = x.entry(0).re;
        let y = ys[0].entry(0).re;
        ComplexMatrix::scalar(Complex64::new(
            p.b1 * x.sin() + p.b2 * y.atan() + p.forcing_diffusion,
            0.0,
        ))
    });
    let spec = ProblemSpec {
        dimension: 1,
        wiener_dimension: 1,
        drift,
        diffusion,
        delays: vec![delay],
        initial,
        coeffs: CoefficientSet::single(p.a1, p.a3.abs(), p.b1.abs(), p.b2.abs())?,
        window,
        real_state: true,
    };
    spec.check_shape()?;
    Ok(spec)
}

/// Delay-free linear test equation `dx = A₁x dt + B₁x dw` with constant
/// initial value `x0`. Carries a zero-lag delay slot that the coefficients
/// ignore.
pub fn pure_sde(a1: f64, b1: f64, x0: f64, window: TimeWindow) -> Result<ProblemSpec> {
    if !(a1.is_finite() && b1.is_finite() && x0.is_finite()) {
        return Err(Error::Parameter("family parameters must be finite".into()));
    }
    let drift: DriftFn =
        Arc::new(move |_t, x, _ys| StateVector::new(vec![x.entry(0) * a1]));
    let diffusion: DiffusionFn =
        Arc::new(move |_t, x, _ys| ComplexMatrix::scalar(x.entry(0) * b1));
    let initial = InitialSegment::constant(window.a, window.a, StateVector::scalar(x0))?;
    let spec = ProblemSpec {
        dimension: 1,
        wiener_dimension: 1,
        drift,
        diffusion,
        delays: vec![DelaySpec::constant(0.0)?],
        initial,
        coeffs: CoefficientSet::single(a1, 0.0, b1.abs(), 0.0)?,
        window,
        real_state: false,
    };
    spec.check_shape()?;
    Ok(spec)
}
