//! Drift-implicit backward Euler stepping with piecewise-linear dense
//! history.
//!
//! One step advances
//!
//! ```text
//! X_{n+1} = X_n + h·f(t_{n+1}, X_{n+1}, Xʰ(t_{n+1} - τ(t_{n+1})))
//!               + g(t_n,   X_n,     Xʰ(t_n - τ(t_n))) · Δw_n
//! ```
//!
//! where `Xʰ` interpolates linearly between nodes and equals the initial
//! segment left of the window. The diffusion looks only at already-computed
//! history; the drift may look into the current step, in which case the
//! unknown enters its own delayed argument through the interpolation weight
//! `l = (t_delayed - t_n)/h` and is folded into the solve.
//!
//! The implicit equation `z = h·f(t_{n+1}, z, l·z + b₀) + rhs` has a unique
//! solution whenever `(α + Σβ_j)·h < 1`. It is solved by a damped
//! fixed-point iteration (damping `1/(1 - h·min(α, 0))`, exact for real
//! scalar linear drifts) with a guarded fallback to a finite-difference
//! Newton iteration for stiff-but-solvable steps.

mod grid;
mod wiener;

pub use grid::Grid;
pub use wiener::{wiener_increments, WienerPath};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{DenseHistory, InitialSegment, ProblemSpec, StateVector};

/// Relative residual tolerance of the implicit solve.
pub const SOLVE_TOL: f64 = 1e-12;
/// Combined iteration budget (fixed-point plus Newton) per step.
pub const SOLVE_BUDGET: usize = 200;
/// Finite-difference scale for Newton directional derivatives.
const FD_SCALE: f64 = 1e-7;

/// Grid states plus the initial segment: the dense numerical solution on
/// `[a - τ, t_n]` for however many nodes are filled.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Grid,
    initial: InitialSegment,
    states: Vec<StateVector>,
}

impl Trajectory {
    fn new(grid: Grid, initial: InitialSegment, x0: StateVector) -> Self {
        let mut states = Vec::with_capacity(grid.steps() + 1);
        states.push(x0);
        Self {
            grid,
            initial,
            states,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of filled nodes (`N + 1` for a complete trajectory).
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn node_state(&self, i: usize) -> &StateVector {
        &self.states[i]
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    /// Dense evaluation: the initial segment for `t ≤ a`, linear
    /// interpolation between filled nodes otherwise. Exact node times
    /// reproduce the stored state bit-for-bit.
    pub fn interpolate(&self, t: f64) -> Result<StateVector> {
        let a = self.grid.a();
        let h = self.grid.h();
        let last = self.states.len() - 1;

        // exact node reproduction
        let idx = ((t - a) / h).round();
        if idx >= 0.0 && idx <= last as f64 {
            let i = idx as usize;
            if self.grid.node(i) == t {
                return Ok(self.states[i].clone());
            }
        }

        if t <= a {
            let (lo, hi) = self.initial.domain();
            // zero-width initial windows extend constantly one step back
            // (a zero lag replaced by a synthetic positive one)
            if lo == hi && t < lo && t >= lo - h {
                return self.initial.eval(hi);
            }
            return self.initial.eval(t);
        }

        let t_last = self.grid.node(last);
        if t > t_last + 1e-9 * (1.0 + t_last.abs()) {
            return Err(Error::OutOfDomain {
                t,
                lo: self.initial.domain().0,
                hi: t_last,
            });
        }

        let i = (((t - a) / h).floor() as usize).min(last - 1);
        let t_i = self.grid.node(i);
        let t_ip1 = self.grid.node(i + 1);
        let w1 = (t_ip1 - t) / h;
        let w2 = (t - t_i) / h;
        Ok(self.states[i].affine(w1, &self.states[i + 1], w2))
    }

    /// The dense solution as a shareable history (clamped to the computed
    /// range at both ends).
    pub fn as_history(&self, tau_max: f64) -> DenseHistory {
        let me = self.clone();
        let lo = self.initial.domain().0;
        let hi = self.grid.node(self.states.len() - 1);
        DenseHistory::new(
            lo,
            tau_max,
            Arc::new(move |u: f64| {
                me.interpolate(u.clamp(lo, hi))
                    .expect("clamped time is in range")
            }),
        )
    }
}

/// The drift's delayed argument during a step: either a value from known
/// history or an affine function of the unknown.
enum DelayArg {
    Fixed(StateVector),
    /// `base + l·z` with `l ∈ (0, 1]`.
    Blend { base: StateVector, l: f64 },
}

impl DelayArg {
    fn value(&self, z: &StateVector) -> StateVector {
        match self {
            DelayArg::Fixed(v) => v.clone(),
            DelayArg::Blend { base, l } => base.affine(1.0, z, *l),
        }
    }

    fn weight(&self) -> f64 {
        match self {
            DelayArg::Fixed(_) => 0.0,
            DelayArg::Blend { l, .. } => *l,
        }
    }
}

/// The unique-solvability precondition of the implicit step:
/// `(α + Σβ_j)·h < 1`.
pub fn check_solvable(problem: &ProblemSpec, h: f64) -> Result<()> {
    let ab = problem.coeffs.alpha + problem.coeffs.beta_sum();
    if ab * h >= 1.0 {
        return Err(Error::Stepsize {
            h,
            reason: format!(
                "(alpha + sum(beta))*h = {:.6} >= 1; the implicit step equation \
                 is only guaranteed uniquely solvable for (alpha + sum(beta))*h < 1",
                ab * h
            ),
        });
    }
    Ok(())
}

fn to_reals(v: &StateVector) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * v.dim());
    for z in v.entries() {
        out.push(z.re);
        out.push(z.im);
    }
    out
}

fn from_reals(r: &[f64]) -> StateVector {
    StateVector::new(
        r.chunks_exact(2)
            .map(|c| num_complex::Complex64::new(c[0], c[1]))
            .collect(),
    )
}

/// Gaussian elimination with partial pivoting; `a` is n×n row-major.
fn solve_dense(a: &mut [f64], n: usize, b: &mut [f64]) -> Result<()> {
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return Err(Error::Parameter("singular Newton system".into()));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] * inv;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in (col + 1)..n {
            acc -= a[col * n + k] * b[k];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

/// Solves one implicit step and returns `X_{n+1}`; the trajectory must hold
/// nodes `0..=n`. `dw` is the m-dimensional increment of step `n`.
pub fn solve_implicit(
    problem: &ProblemSpec,
    traj: &Trajectory,
    n: usize,
    dw: &[f64],
) -> Result<StateVector> {
    solve_implicit_from(problem, traj, n, dw, traj.node_state(n).clone())
}

/// As [`solve_implicit`] but starting the iteration from `guess` — the
/// uniqueness of the solution makes the result independent of it.
pub fn solve_implicit_from(
    problem: &ProblemSpec,
    traj: &Trajectory,
    n: usize,
    dw: &[f64],
    guess: StateVector,
) -> Result<StateVector> {
    let grid = traj.grid();
    let h = grid.h();
    let t_n = grid.node(n);
    let t_next = grid.node(n + 1);
    let x_n = traj.node_state(n);

    // diffusion delayed arguments: always in known history (delayed time <= t_n)
    let g_args: Vec<StateVector> = problem
        .delays
        .iter()
        .map(|d| traj.interpolate(d.delayed_time(t_n)))
        .collect::<Result<_>>()?;
    let g_mat = (problem.diffusion)(t_n, x_n, &g_args);
    debug_assert_eq!(g_mat.rows(), problem.dimension);
    debug_assert_eq!(g_mat.cols(), problem.wiener_dimension);
    let rhs = x_n.add(&g_mat.mul_real_vec(dw));

    // drift delayed arguments at t_{n+1}: split into known history and the
    // part interpolating against the unknown
    let f_args: Vec<DelayArg> = problem
        .delays
        .iter()
        .map(|d| {
            let u = d.delayed_time(t_next);
            if u <= t_n {
                Ok(DelayArg::Fixed(traj.interpolate(u)?))
            } else {
                let l = ((u - t_n) / h).clamp(0.0, 1.0);
                Ok(DelayArg::Blend {
                    base: x_n.scale((t_next - u) / h),
                    l,
                })
            }
        })
        .collect::<Result<_>>()?;

    let eval_phi = |z: &StateVector| -> StateVector {
        let args: Vec<StateVector> = f_args.iter().map(|a| a.value(z)).collect();
        rhs.affine(1.0, &(problem.drift)(t_next, z, &args), h)
    };
    let tol_at = |z: &StateVector| SOLVE_TOL * (1.0 + z.norm());

    let alpha = problem.coeffs.alpha;
    // contraction estimate of the undamped map; coupling through the
    // unknown's own delayed argument enters with its interpolation weight
    let coupled_beta: f64 = problem
        .coeffs
        .beta
        .iter()
        .zip(&f_args)
        .map(|(b, arg)| b * arg.weight())
        .sum();
    let fp_estimate = h * (alpha.max(0.0) + coupled_beta);
    let omega = 1.0 / (1.0 - h * alpha.min(0.0));

    let mut z = guess;
    let mut iterations = 0usize;

    if fp_estimate <= 0.5 {
        let mut prev = f64::INFINITY;
        let mut growth = 0u32;
        while iterations < SOLVE_BUDGET {
            let phi = eval_phi(&z);
            let residual = z.sub(&phi).norm();
            iterations += 1;
            if residual <= tol_at(&z) {
                return Ok(z);
            }
            if !residual.is_finite() || residual >= prev {
                growth += 1;
                if growth >= 3 {
                    break; // stalled or diverging: hand over to Newton
                }
            } else {
                growth = 0;
            }
            prev = residual;
            z = z.affine(1.0 - omega, &phi, omega);
            if !z.is_finite() {
                z = traj.node_state(n).clone();
                break;
            }
        }
    }

    // Newton on F(z) = z - phi(z) over the real embedding of C^d
    let dim = 2 * problem.dimension;
    let eval_f = |z: &StateVector| -> Vec<f64> {
        let phi = eval_phi(z);
        to_reals(&z.sub(&phi))
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut f_val = eval_f(&z);
    let mut residual = norm(&f_val);
    while iterations < SOLVE_BUDGET {
        if residual <= tol_at(&z) {
            return Ok(z);
        }
        iterations += 1;
        let delta = FD_SCALE * (1.0 + z.norm());
        let z_re = to_reals(&z);
        let mut jac = vec![0.0f64; dim * dim];
        for k in 0..dim {
            let mut bumped = z_re.clone();
            bumped[k] += delta;
            let f_k = eval_f(&from_reals(&bumped));
            for row in 0..dim {
                jac[row * dim + k] = (f_k[row] - f_val[row]) / delta;
            }
        }
        let mut step: Vec<f64> = f_val.iter().map(|v| -v).collect();
        solve_dense(&mut jac, dim, &mut step)?;

        // damped update: halve until the residual decreases
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1e-4 {
            let mut trial = z_re.clone();
            for (t, s) in trial.iter_mut().zip(&step) {
                *t += lambda * s;
            }
            let z_trial = from_reals(&trial);
            let f_trial = eval_f(&z_trial);
            let r_trial = norm(&f_trial);
            if r_trial < residual || r_trial <= tol_at(&z_trial) {
                z = z_trial;
                f_val = f_trial;
                residual = r_trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    Err(Error::StepSolve {
        t: t_next,
        iterations,
        residual,
    })
}

/// Runs the scheme over the whole grid starting from the problem's own
/// initial segment.
pub fn simulate(problem: &ProblemSpec, grid: &Grid, path: &WienerPath) -> Result<Trajectory> {
    simulate_with_initial(problem, &problem.initial, grid, path)
}

/// Runs the scheme with an overriding initial segment.
pub fn simulate_with_initial(
    problem: &ProblemSpec,
    initial: &InitialSegment,
    grid: &Grid,
    path: &WienerPath,
) -> Result<Trajectory> {
    if initial.dim() != problem.dimension {
        return Err(Error::Parameter(format!(
            "initial segment dimension {} does not match problem dimension {}",
            initial.dim(),
            problem.dimension
        )));
    }
    if path.steps() != grid.steps() || path.wiener_dim() != problem.wiener_dimension {
        return Err(Error::Parameter(
            "wiener path shape does not match grid/problem".into(),
        ));
    }
    check_solvable(problem, grid.h())?;

    let x0 = initial.eval(grid.a())?;
    let mut traj = Trajectory::new(*grid, initial.clone(), x0);
    for n in 0..grid.steps() {
        let x_next = solve_implicit(problem, &traj, n, path.increment(n))?;
        if !x_next.is_finite() {
            return Err(Error::NonFiniteState {
                node: n + 1,
                t: grid.node(n + 1),
            });
        }
        traj.states.push(x_next);
    }
    Ok(traj)
}

/// Two trajectories driven by the identical noise path, differing only in
/// their initial segments — the coupling under which mean-square deviation
/// bounds are stated.
pub fn simulate_pair(
    problem: &ProblemSpec,
    xi: &InitialSegment,
    eta: &InitialSegment,
    grid: &Grid,
    path: &WienerPath,
) -> Result<(Trajectory, Trajectory)> {
    let tx = simulate_with_initial(problem, xi, grid, path)?;
    let ty = simulate_with_initial(problem, eta, grid, path)?;
    Ok((tx, ty))
}
