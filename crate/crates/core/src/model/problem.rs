//! The full problem description and probe-based validation of its declared
//! coefficient bounds.

use std::sync::Arc;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::model::{CoefficientSet, ComplexMatrix, DelaySpec, InitialSegment, StateVector};

/// Drift evaluator `f(t, x, (y_1, …, y_r)) ∈ ℂ^d`.
pub type DriftFn = Arc<dyn Fn(f64, &StateVector, &[StateVector]) -> StateVector + Send + Sync>;

/// Diffusion evaluator `g(t, x, (y_1, …, y_r)) ∈ ℂ^{d×m}`.
pub type DiffusionFn = Arc<dyn Fn(f64, &StateVector, &[StateVector]) -> ComplexMatrix + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub a: f64,
    pub b: f64,
}

impl TimeWindow {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::Parameter(format!(
                "integration window [{a}, {b}] must be a nonempty finite interval"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }
}

/// One delay differential problem instance. Immutable after construction;
/// evaluators are pure functions, so the whole spec is safe to share across
/// worker threads.
#[derive(Clone)]
pub struct ProblemSpec {
    pub dimension: usize,
    pub wiener_dimension: usize,
    pub drift: DriftFn,
    pub diffusion: DiffusionFn,
    pub delays: Vec<DelaySpec>,
    pub initial: InitialSegment,
    pub coeffs: CoefficientSet,
    pub window: TimeWindow,
    /// Restrict validation probes to real states. Set for families whose
    /// coefficient bounds hold on ℝ^d but not on all of ℂ^d (cubic drifts,
    /// trigonometric diffusions).
    pub real_state: bool,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("dimension", &self.dimension)
            .field("wiener_dimension", &self.wiener_dimension)
            .field("delays", &self.delays)
            .field("initial", &self.initial)
            .field("coeffs", &self.coeffs)
            .field("window", &self.window)
            .field("real_state", &self.real_state)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// Largest reach of any delay below the window start.
    pub fn tau_max(&self) -> f64 {
        self.delays.iter().map(|d| d.tau_max).fold(0.0, f64::max)
    }

    /// Checks structural consistency: counts, dimensions, segment domain.
    pub fn check_shape(&self) -> Result<()> {
        if self.delays.is_empty() {
            return Err(Error::Parameter("a problem needs at least one delay".into()));
        }
        if self.coeffs.delays() != self.delays.len() {
            return Err(Error::Parameter(format!(
                "coefficient set declares {} delays but the problem has {}",
                self.coeffs.delays(),
                self.delays.len()
            )));
        }
        if self.initial.dim() != self.dimension {
            return Err(Error::Parameter(format!(
                "initial segment dimension {} does not match problem dimension {}",
                self.initial.dim(),
                self.dimension
            )));
        }
        let (lo, hi) = self.initial.domain();
        let need_lo = self.window.a - self.tau_max();
        if lo > need_lo + 1e-9 * (1.0 + need_lo.abs()) || hi < self.window.a {
            return Err(Error::Parameter(format!(
                "initial segment domain [{lo}, {hi}] does not cover [{}, {}]",
                need_lo, self.window.a
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    /// `Re⟨x₁-x₂, f(t,x₁,y)-f(t,x₂,y)⟩ ≤ α·|x₁-x₂|²`
    OneSidedDrift,
    /// `|f(t,x,y¹)-f(t,x,y²)| ≤ Σ_j β_j·|y¹_j-y²_j|`
    DriftDelayLipschitz,
    /// `|g(t,x₁,y¹)-g(t,x₂,y²)| ≤ γ₁·|x₁-x₂| + Σ_j γ₂_j·|y¹_j-y²_j|`
    DiffusionLipschitz,
    /// `a - tau_max ≤ t - τ(t) ≤ t` over the window
    DelayWindow,
}

#[derive(Debug, Clone)]
pub struct ConditionViolation {
    pub condition: ConditionKind,
    pub probe_index: usize,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// The witnessing sample, formatted for the report.
    pub witness: String,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub probes: usize,
    pub violations: Vec<ConditionViolation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Half-width of the probe box for validation samples.
const PROBE_BOX: f64 = 2.0;
const VALIDATE_SEED: u64 = 0x5dde_5eed;

/// Spot-checks the declared coefficient bounds on random probe tuples and
/// verifies the delay-window constraint. Probing falsifies bad declarations;
/// it does not prove the universally quantified conditions.
pub fn validate_problem(spec: &ProblemSpec, probes: usize) -> Result<ValidationReport> {
    validate_problem_seeded(spec, probes, VALIDATE_SEED)
}

pub fn validate_problem_seeded(
    spec: &ProblemSpec,
    probes: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if probes == 0 {
        return Err(Error::Parameter("validation needs at least one probe".into()));
    }
    spec.check_shape()?;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let d = spec.dimension;
    let r = spec.delays.len();
    let (a, b) = (spec.window.a, spec.window.b);

    let mut violations: Vec<ConditionViolation> = Vec::new();
    let record = |v: ConditionViolation, list: &mut Vec<ConditionViolation>| {
        // keep the first witness per condition
        if !list.iter().any(|w| w.condition == v.condition) {
            list.push(v);
        }
    };

    for probe in 0..probes {
        let t = a + uniform() * (b - a);
        let sample_state = |uniform: &mut dyn FnMut() -> f64| -> StateVector {
            StateVector::new(
                (0..d)
                    .map(|_| {
                        let re = (uniform() * 2.0 - 1.0) * PROBE_BOX;
                        let im = if spec.real_state {
                            0.0
                        } else {
                            (uniform() * 2.0 - 1.0) * PROBE_BOX
                        };
                        Complex64::new(re, im)
                    })
                    .collect(),
            )
        };
        let x1 = sample_state(&mut uniform);
        let x2 = sample_state(&mut uniform);
        let y1: Vec<StateVector> = (0..r).map(|_| sample_state(&mut uniform)).collect();
        let y2: Vec<StateVector> = (0..r).map(|_| sample_state(&mut uniform)).collect();

        let tol = 1e-9;

        // one-sided bound of the drift in the present state
        let dx = x1.sub(&x2);
        let df = (spec.drift)(t, &x1, &y1).sub(&(spec.drift)(t, &x2, &y1));
        let lhs = dx.re_inner(&df);
        let rhs = spec.coeffs.alpha * dx.norm_sq();
        if lhs > rhs + tol * (1.0 + dx.norm_sq()) {
            record(
                ConditionViolation {
                    condition: ConditionKind::OneSidedDrift,
                    probe_index: probe,
                    t,
                    lhs,
                    rhs,
                    witness: format!("t = {t}, x1 = {x1:?}, x2 = {x2:?}, y = {y1:?}"),
                },
                &mut violations,
            );
        }

        // Lipschitz bound of the drift in the delayed arguments
        let df = (spec.drift)(t, &x1, &y1).sub(&(spec.drift)(t, &x1, &y2));
        let lhs = df.norm();
        let rhs: f64 = spec
            .coeffs
            .beta
            .iter()
            .zip(y1.iter().zip(&y2))
            .map(|(beta, (u, v))| beta * u.sub(v).norm())
            .sum();
        if lhs > rhs + tol * (1.0 + rhs) {
            record(
                ConditionViolation {
                    condition: ConditionKind::DriftDelayLipschitz,
                    probe_index: probe,
                    t,
                    lhs,
                    rhs,
                    witness: format!("t = {t}, x = {x1:?}, y1 = {y1:?}, y2 = {y2:?}"),
                },
                &mut violations,
            );
        }

        // Lipschitz bound of the diffusion
        let g1 = (spec.diffusion)(t, &x1, &y1);
        let g2 = (spec.diffusion)(t, &x2, &y2);
        let mut diff = ComplexMatrix::zeros(g1.rows(), g1.cols());
        for i in 0..g1.rows() {
            for j in 0..g1.cols() {
                diff.set(i, j, g1.get(i, j) - g2.get(i, j));
            }
        }
        let lhs = diff.trace_norm();
        let rhs = spec.coeffs.gamma1 * dx.norm()
            + spec
                .coeffs
                .gamma2
                .iter()
                .zip(y1.iter().zip(&y2))
                .map(|(g, (u, v))| g * u.sub(v).norm())
                .sum::<f64>();
        if lhs > rhs + tol * (1.0 + rhs) {
            record(
                ConditionViolation {
                    condition: ConditionKind::DiffusionLipschitz,
                    probe_index: probe,
                    t,
                    lhs,
                    rhs,
                    witness: format!("t = {t}, x1 = {x1:?}, x2 = {x2:?}, y1 = {y1:?}, y2 = {y2:?}"),
                },
                &mut violations,
            );
        }

        // delay-window constraint
        let floor = a - spec.tau_max();
        for delay in &spec.delays {
            let s = delay.delayed_time(t);
            if s > t + tol || s < floor - tol * (1.0 + floor.abs()) {
                record(
                    ConditionViolation {
                        condition: ConditionKind::DelayWindow,
                        probe_index: probe,
                        t,
                        lhs: s,
                        rhs: floor,
                        witness: format!("t = {t}, delayed time {s}, window floor {floor}"),
                    },
                    &mut violations,
                );
            }
        }
    }

    Ok(ValidationReport { probes, violations })
}
