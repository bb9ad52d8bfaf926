//! Builtin problem registry: maps config names and parameters onto the
//! library's problem families. Every constructed problem is spot-checked
//! against its declared coefficient bounds before use.

use num_complex::Complex64;

use sdde::error::{Error, Result};
use sdde::families;
use sdde::model::{validate_problem, InitialSegment, ProblemSpec, TimeWindow};

use crate::config::ExperimentConfig;

/// Probes used for load-time validation of constructed problems.
const REGISTRY_PROBES: usize = 1000;

pub fn family_names() -> Vec<&'static str> {
    vec![
        "scalar_linear",
        "scalar_linear_two_delays",
        "nonlinear",
        "pure_sde",
    ]
}

/// Accepted `problem.*` parameter names per family.
pub fn family_params(name: &str) -> Option<&'static [&'static str]> {
    match name {
        "scalar_linear" => Some(&[
            "A1", "A2", "B1", "B2", "A1_im", "A2_im", "B1_im", "B2_im", "F", "G", "F_im", "G_im",
        ]),
        "scalar_linear_two_delays" => Some(&["A1", "A2", "A2b", "B1", "B2", "B2b"]),
        "nonlinear" => Some(&["A1", "A2", "A3", "B1", "B2", "F", "G"]),
        "pure_sde" => Some(&["A1", "B1"]),
        _ => None,
    }
}

/// The problem (carrying ξ as its initial segment) plus the perturbed
/// segment η, both resolved on `[a - τ, a]`.
pub struct BuiltProblem {
    pub spec: ProblemSpec,
    pub xi: InitialSegment,
    pub eta: InitialSegment,
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<BuiltProblem> {
    let window = TimeWindow::new(cfg.grid_a, cfg.grid_b)?;
    let param = |name: &str| cfg.problem_params.get(name).copied().unwrap_or(0.0);
    let complex_param = |name: &str| {
        Complex64::new(param(name), param(&format!("{name}_im")))
    };

    let spec = match cfg.problem_name.as_str() {
        "scalar_linear" => {
            let delay = one_delay(cfg, window)?;
            let (xi, _) = segments(cfg, window, delay_tau(cfg, window)?)?;
            families::scalar_linear(
                families::ScalarLinearParams {
                    a1: complex_param("A1"),
                    a2: complex_param("A2"),
                    b1: complex_param("B1"),
                    b2: complex_param("B2"),
                    forcing_drift: complex_param("F"),
                    forcing_diffusion: complex_param("G"),
                },
                delay,
                xi,
                window,
            )?
        }
        "scalar_linear_two_delays" => {
            if cfg.delays.len() != 2 {
                return Err(Error::Parameter(
                    "scalar_linear_two_delays needs delay.kind and delay.kind2".into(),
                ));
            }
            let d1 = cfg.delays[0].resolve(window.a, window.b)?;
            let d2 = cfg.delays[1].resolve(window.a, window.b)?;
            let tau = d1.tau_max.max(d2.tau_max);
            let (xi, _) = segments(cfg, window, tau)?;
            families::scalar_linear_two_delays(
                families::TwoDelayLinearParams {
                    a1: param("A1"),
                    a2: [param("A2"), param("A2b")],
                    b1: param("B1"),
                    b2: [param("B2"), param("B2b")],
                },
                [d1, d2],
                xi,
                window,
            )?
        }
        "nonlinear" => {
            let delay = one_delay(cfg, window)?;
            let (xi, _) = segments(cfg, window, delay_tau(cfg, window)?)?;
            families::nonlinear(
                families::NonlinearParams {
                    a1: param("A1"),
                    a2: param("A2"),
                    a3: param("A3"),
                    b1: param("B1"),
                    b2: param("B2"),
                    forcing_drift: param("F"),
                    forcing_diffusion: param("G"),
                },
                delay,
                xi,
                window,
            )?
        }
        "pure_sde" => {
            // the delay section is irrelevant here: the family has no lag
            let (xi, _) = segments(cfg, window, 0.0)?;
            let x0 = xi.eval(window.a)?.entry(0).re;
            families::pure_sde(param("A1"), param("B1"), x0, window)?
        }
        other => {
            return Err(Error::Parameter(format!(
                "`{other}` is not a registered problem family"
            )))
        }
    };

    let tau = spec.tau_max();
    let (xi, eta) = segments(cfg, window, tau)?;
    let report = validate_problem(&spec, REGISTRY_PROBES)?;
    if !report.passed() {
        let v = &report.violations[0];
        return Err(Error::Validation(format!(
            "constructed problem `{}` violates its declared bounds ({:?}: lhs {} > rhs {}); \
             witness: {}",
            cfg.problem_name, v.condition, v.lhs, v.rhs, v.witness
        )));
    }
    Ok(BuiltProblem { spec, xi, eta })
}

fn one_delay(cfg: &ExperimentConfig, window: TimeWindow) -> Result<sdde::model::DelaySpec> {
    if cfg.delays.len() != 1 {
        return Err(Error::Parameter(format!(
            "family `{}` takes exactly one delay, got {}",
            cfg.problem_name,
            cfg.delays.len()
        )));
    }
    cfg.delays[0].resolve(window.a, window.b)
}

fn delay_tau(cfg: &ExperimentConfig, window: TimeWindow) -> Result<f64> {
    Ok(cfg
        .delays
        .iter()
        .map(|d| d.resolve(window.a, window.b).map(|s| s.tau_max))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max))
}

fn segments(
    cfg: &ExperimentConfig,
    window: TimeWindow,
    tau: f64,
) -> Result<(InitialSegment, InitialSegment)> {
    let lo = window.a - tau;
    Ok((
        cfg.xi.resolve(lo, window.a)?,
        cfg.eta.resolve(lo, window.a)?,
    ))
}
