//! Monte Carlo estimation of mean-square deviations and verification of
//! their bound envelopes.
//!
//! The estimand is `E|X_n - Y_n|²` for coupled trajectory pairs driven by
//! common noise: the plug-in ensemble mean of squared norms with its plain
//! sample standard error. Reduction over paths runs chunk-parallel with a
//! fixed chunk size and combines partial sums in chunk order, so results
//! are bit-identical for any worker count.

use rayon::prelude::*;

use crate::analysis::{contraction_constant, discrete_constants, NodeSequence};
use crate::error::{Error, Result};
use crate::families;
use crate::integrator::{check_solvable, simulate, simulate_pair, wiener_increments, Grid};
use crate::model::{InitialSegment, ProblemSpec, TimeWindow};

/// Paths per reduction chunk. Fixed — independent of the worker count — so
/// the summation tree never depends on scheduling.
const PATH_CHUNK: usize = 64;

/// Sample count for the supremum of `|ξ - η|²` over the initial interval.
const D0_SAMPLES: usize = 2048;

/// Per-node Monte Carlo estimates of `E|X_n - Y_n|²` with envelopes.
#[derive(Debug, Clone)]
pub struct MsDeviationSeries {
    pub times: Vec<f64>,
    pub estimates: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub envelopes: Vec<f64>,
    pub violated: Vec<bool>,
    pub paths: usize,
    pub master_seed: u64,
    pub h: f64,
    /// Supremum of `|ξ - η|²` over the initial interval.
    pub d0: f64,
    pub slack_sigmas: f64,
}

impl MsDeviationSeries {
    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }
}

fn initial_deviation_sup(xi: &InitialSegment, eta: &InitialSegment) -> Result<f64> {
    let (lo_x, hi_x) = xi.domain();
    let (lo_e, hi_e) = eta.domain();
    let lo = lo_x.max(lo_e);
    let hi = hi_x.min(hi_e);
    if hi < lo {
        return Err(Error::Parameter(
            "initial segments have disjoint domains".into(),
        ));
    }
    if hi == lo {
        return Ok(xi.eval(lo)?.sub(&eta.eval(lo)?).norm_sq());
    }
    let mut sup: f64 = 0.0;
    for k in 0..=D0_SAMPLES {
        let t = lo + (hi - lo) * k as f64 / D0_SAMPLES as f64;
        sup = sup.max(xi.eval(t)?.sub(&eta.eval(t)?).norm_sq());
    }
    Ok(sup)
}

/// Runs `paths` coupled simulations and reports the per-node deviation
/// estimate, standard error, envelope value and violation flag.
///
/// The envelope is the constant `D0` when the contraction constant is
/// nonpositive, and `e^{c̃·(t_n - a)}·D0` otherwise; in the latter case the
/// stepsize must satisfy `h·c ≤ c0`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_ms_deviation(
    problem: &ProblemSpec,
    xi: &InitialSegment,
    eta: &InitialSegment,
    grid: &Grid,
    paths: usize,
    master_seed: u64,
    slack_sigmas: f64,
    c0: f64,
) -> Result<MsDeviationSeries> {
    if paths == 0 {
        return Err(Error::Parameter("need at least one path".into()));
    }
    check_solvable(problem, grid.h())?;
    let c = contraction_constant(&problem.coeffs);
    let envelope_rate = if c > 0.0 {
        if grid.h() * c > c0 {
            return Err(Error::Stepsize {
                h: grid.h(),
                reason: format!(
                    "h*c = {:.6} exceeds c0 = {c0}; the growth envelope requires h*c <= c0",
                    grid.h() * c
                ),
            });
        }
        Some(discrete_constants(&problem.coeffs, grid.h())?.c_tilde)
    } else {
        None
    };
    let d0 = initial_deviation_sup(xi, eta)?;

    let n_nodes = grid.steps() + 1;
    let n_chunks = paths.div_ceil(PATH_CHUNK);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut sum = vec![0.0f64; n_nodes];
            let mut sum_sq = vec![0.0f64; n_nodes];
            let start = chunk * PATH_CHUNK;
            let end = ((chunk + 1) * PATH_CHUNK).min(paths);
            for j in start..end {
                let path =
                    wiener_increments(master_seed, j as u64, grid, problem.wiener_dimension);
                let (tx, ty) =
                    simulate_pair(problem, xi, eta, grid, &path).map_err(|e| {
                        Error::PathFailure {
                            path: j as u64,
                            source: Box::new(e),
                        }
                    })?;
                for node in 0..n_nodes {
                    let s = tx.node_state(node).sub(ty.node_state(node)).norm_sq();
                    sum[node] += s;
                    sum_sq[node] += s * s;
                }
            }
            Ok((sum, sum_sq))
        })
        .collect::<Result<Vec<_>>>()?;

    // combine partial sums in chunk order: bit-stable for any thread count
    let mut sum = vec![0.0f64; n_nodes];
    let mut sum_sq = vec![0.0f64; n_nodes];
    for (ps, pq) in &partials {
        for node in 0..n_nodes {
            sum[node] += ps[node];
            sum_sq[node] += pq[node];
        }
    }

    let m = paths as f64;
    let a = grid.a();
    let mut times = Vec::with_capacity(n_nodes);
    let mut estimates = Vec::with_capacity(n_nodes);
    let mut stderrs = Vec::with_capacity(n_nodes);
    let mut envelopes = Vec::with_capacity(n_nodes);
    let mut violated = Vec::with_capacity(n_nodes);
    for node in 0..n_nodes {
        let t = grid.node(node);
        let mean = sum[node] / m;
        let stderr = if paths >= 2 {
            let var = ((sum_sq[node] - sum[node] * sum[node] / m) / (m - 1.0)).max(0.0);
            (var / m).sqrt()
        } else {
            0.0
        };
        let envelope = match envelope_rate {
            Some(rate) => (rate * (t - a)).exp() * d0,
            None => d0,
        };
        times.push(t);
        estimates.push(mean);
        stderrs.push(stderr);
        envelopes.push(envelope);
        violated.push(mean - slack_sigmas * stderr > envelope);
    }

    Ok(MsDeviationSeries {
        times,
        estimates,
        stderrs,
        envelopes,
        violated,
        paths,
        master_seed,
        h: grid.h(),
        d0,
        slack_sigmas,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub nodes: usize,
    pub violations: usize,
    /// Largest value of `estimate - slack·stderr - envelope` over all nodes;
    /// negative when the bound holds everywhere with margin.
    pub worst_margin: f64,
    pub first_violation: Option<usize>,
}

/// Flags every node where the estimate exceeds its envelope beyond the
/// statistical slack.
pub fn check_bound(series: &MsDeviationSeries, slack_sigmas: f64) -> BoundReport {
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut first = None;
    for n in 0..series.len() {
        let margin = series.estimates[n] - slack_sigmas * series.stderrs[n] - series.envelopes[n];
        worst = worst.max(margin);
        if margin > 0.0 {
            violations += 1;
            first.get_or_insert(n);
        }
    }
    BoundReport {
        nodes: series.len(),
        violations,
        worst_margin: worst,
        first_violation: first,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockBound {
    pub block: usize,
    /// First node of the block, `n_k + 1`.
    pub first_node: usize,
    /// Last node of the block, `n_{k+1}`.
    pub last_node: usize,
    /// `c₂^{k+1}·D0`.
    pub envelope: f64,
    pub max_estimate: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub blocks: Vec<BlockBound>,
    pub violations: usize,
}

/// Applies the blockwise envelope `c₂^{k+1}·D0` to the nodes of each block
/// `(n_k, n_{k+1}]`. Requires `c₂ < 1`, i.e. an asymptotically contractive
/// certificate.
pub fn asymptotic_envelope(
    series: &MsDeviationSeries,
    seq: &NodeSequence,
    c2: f64,
    d0: f64,
    slack_sigmas: f64,
) -> Result<AsymptoticReport> {
    if !(c2 < 1.0) {
        return Err(Error::Certification(format!(
            "blockwise decay requires a one-step ratio c2 < 1, got {c2}; \
             the problem is not certified asymptotically contractive"
        )));
    }
    let mut blocks = Vec::with_capacity(seq.blocks());
    let mut total = 0usize;
    for k in 0..seq.blocks() {
        let first = seq.indices[k] + 1;
        let last = seq.indices[k + 1];
        if last >= series.len() {
            break;
        }
        let envelope = c2.powi(k as i32 + 1) * d0;
        let mut max_estimate = 0.0f64;
        let mut violations = 0usize;
        for n in first..=last {
            max_estimate = max_estimate.max(series.estimates[n]);
            if series.estimates[n] - slack_sigmas * series.stderrs[n] > envelope {
                violations += 1;
            }
        }
        total += violations;
        blocks.push(BlockBound {
            block: k,
            first_node: first,
            last_node: last,
            envelope,
            max_estimate,
            violations,
        });
    }
    Ok(AsymptoticReport {
        blocks,
        violations: total,
    })
}

/// Exact second moments `E|X_n|²` of the drift-implicit iterates for
/// `dx = A₁x dt + B₁x dw` (no delay): starting from `x0²`, each step
/// multiplies by `(1 + B₁²h)/(1 - A₁h)²`. Serves as an independent oracle
/// for the Monte Carlo estimator.
pub fn exact_second_moment_scalar_linear(
    a1: f64,
    b1: f64,
    h: f64,
    steps: usize,
    x0: f64,
) -> Result<Vec<f64>> {
    let den = 1.0 - a1 * h;
    if den.abs() < 1e-14 {
        return Err(Error::Parameter(format!(
            "1 - A1*h = {den} must be nonzero"
        )));
    }
    let ratio = (1.0 + b1 * b1 * h) / (den * den);
    let mut moments = Vec::with_capacity(steps + 1);
    let mut m = x0 * x0;
    moments.push(m);
    for _ in 0..steps {
        m *= ratio;
        moments.push(m);
    }
    Ok(moments)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongOrderPoint {
    pub h: f64,
    pub rms_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongOrderFit {
    /// Least-squares slope of `log rms` against `log h`.
    pub slope: f64,
    pub points: Vec<StrongOrderPoint>,
}

/// Measures the strong convergence order of the scheme on
/// `dx = A₁x dt + B₁x dw` against the exact solution
/// `x(T) = x0·exp((A₁ - B₁²/2)·T + B₁·w(T))` evaluated on the simulated
/// Brownian path (summed increments), removing reference-discretization
/// bias.
#[allow(clippy::too_many_arguments)]
pub fn strong_error_slope(
    a1: f64,
    b1: f64,
    x0: f64,
    window: TimeWindow,
    h_list: &[f64],
    paths: usize,
    master_seed: u64,
) -> Result<StrongOrderFit> {
    if h_list.len() < 2 {
        return Err(Error::Parameter(
            "strong-order slope needs at least two stepsizes".into(),
        ));
    }
    if paths == 0 {
        return Err(Error::Parameter("need at least one path".into()));
    }
    let span = window.length();
    let mut points = Vec::with_capacity(h_list.len());
    for &h in h_list {
        if !(h > 0.0) {
            return Err(Error::Parameter(format!("stepsize {h} must be positive")));
        }
        let steps = (span / h).round() as usize;
        if steps == 0 || ((span / steps as f64) - h).abs() > 1e-9 * h {
            return Err(Error::Parameter(format!(
                "stepsize {h} does not divide the window of length {span}"
            )));
        }
        let grid = Grid::new(window.a, window.b, steps)?;
        let problem = families::pure_sde(a1, b1, x0, window)?;

        let n_chunks = paths.div_ceil(PATH_CHUNK);
        let partials: Vec<f64> = (0..n_chunks)
            .into_par_iter()
            .map(|chunk| -> Result<f64> {
                let mut acc = 0.0f64;
                let start = chunk * PATH_CHUNK;
                let end = ((chunk + 1) * PATH_CHUNK).min(paths);
                for j in start..end {
                    let path = wiener_increments(master_seed, j as u64, &grid, 1);
                    let traj = simulate(&problem, &grid, &path).map_err(|e| {
                        Error::PathFailure {
                            path: j as u64,
                            source: Box::new(e),
                        }
                    })?;
                    let w_t = path.accumulated(steps)[0];
                    let exact = x0 * ((a1 - 0.5 * b1 * b1) * span + b1 * w_t).exp();
                    let err = traj.node_state(steps).entry(0).re - exact;
                    acc += err * err;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        let mean_sq = partials.iter().sum::<f64>() / paths as f64;
        let rms = mean_sq.sqrt();
        if !(rms > 0.0) {
            return Err(Error::Parameter(
                "zero strong error; slope is undefined".into(),
            ));
        }
        points.push(StrongOrderPoint { h, rms_error: rms });
    }

    let xs: Vec<f64> = points.iter().map(|p| p.h.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.rms_error.ln()).collect();
    let n = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_bar) * (y - y_bar))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - x_bar) * (x - x_bar)).sum();
    Ok(StrongOrderFit {
        slope: sxy / sxx,
        points,
    })
}
