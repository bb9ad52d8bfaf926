//! Problem model: states, delays, initial segments, coefficient bounds and
//! the perturbation transform on dense histories.

mod coeffs;
mod delay;
mod history;
mod initial;
mod problem;
mod state;

pub use coeffs::CoefficientSet;
pub use delay::{DelayKind, DelaySpec};
pub use history::{perturb_history, DenseHistory};
pub use initial::{InitialSegment, SegmentShape};
pub use problem::{
    validate_problem, validate_problem_seeded, ConditionKind, ConditionViolation, DiffusionFn,
    DriftFn, ProblemSpec, TimeWindow, ValidationReport,
};
pub use state::{ComplexMatrix, StateVector};
