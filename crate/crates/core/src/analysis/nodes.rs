//! Node sequences for blockwise decay.
//!
//! A node sequence `n₀ = 0 < n₁ < n₂ < …` on a uniform grid satisfies: for
//! every grid time `t ≥ t_{n_{k+1}}`, the delayed time `t - τ(t)` has reached
//! at least `t_{n_k + 1}`. Every step inside block `k+1` then only looks back
//! at nodes of block `k` or later, which is what turns a one-step ratio
//! `c₂ < 1` into geometric decay per block.
//!
//! Equality at the boundary is admissible — interpolation at an exact node
//! involves only that node — and comparisons carry a small slack so that
//! grid-point roundoff cannot flip them.

use crate::error::{Error, Result};
use crate::integrator::Grid;
use crate::model::{DelayKind, DelaySpec};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSequence {
    /// `n₀ = 0 < n₁ < …`, grid indices.
    pub indices: Vec<usize>,
    pub a: f64,
    pub h: f64,
}

impl NodeSequence {
    /// Number of complete blocks `(n_k, n_{k+1}]`.
    pub fn blocks(&self) -> usize {
        self.indices.len().saturating_sub(1)
    }
}

fn tol_for(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

/// Ceiling with slack against roundoff: values within `~1e-9` below an
/// integer round down to it.
fn ceil_slack(x: f64) -> f64 {
    (x - tol_for(x)).ceil()
}

/// Smallest grid index `j ≥ m` such that every grid time from `t_j` on has
/// its delayed time at or past `target`; `None` if no such index fits the
/// window.
fn next_index(delay: &DelaySpec, grid: &Grid, m: usize, target: f64) -> Option<usize> {
    let h = grid.h();
    let a = grid.a();
    let n = grid.steps();
    let from_float = |x: f64| -> Option<usize> {
        if !x.is_finite() || x > n as f64 {
            return None;
        }
        Some((x.max(0.0) as usize).max(m))
    };
    match &delay.kind {
        // t - tau >= target  <=>  j >= m + tau/h
        DelayKind::Constant(tau) => from_float(m as f64 + ceil_slack(tau / h)),
        // q(a + jh) >= target  <=>  j >= (target - q a)/(q h)
        DelayKind::Pantograph(q) => from_float(ceil_slack((target - q * a) / (q * h))),
        // floor(t - i) >= target  <=>  t >= i + ceil(target)
        DelayKind::PiecewiseConstant(i) => {
            let t_min = f64::from(*i) + ceil_slack(target);
            from_float(ceil_slack((t_min - a) / h))
        }
        // non-monotone in general: suffix scan over the grid
        DelayKind::Tabulated { .. } => {
            let tol = tol_for(target);
            let mut best: Option<usize> = None;
            for j in (m..=n).rev() {
                if delay.delayed_time(grid.node(j)) >= target - tol {
                    best = Some(j);
                } else {
                    break;
                }
            }
            best
        }
    }
}

/// Builds the first `blocks + 1` node-sequence indices, or as many as fit in
/// the window. Errors when not even one block can be formed — the delayed
/// time never reaches past the first node within the window.
pub fn node_sequence(delay: &DelaySpec, grid: &Grid, blocks: usize) -> Result<NodeSequence> {
    let mut indices = vec![0usize];
    for _ in 0..blocks {
        let last = *indices.last().expect("nonempty");
        let m = last + 1;
        if m > grid.steps() {
            break;
        }
        let target = grid.node(m);
        match next_index(delay, grid, m, target) {
            Some(j) if j <= grid.steps() => {
                debug_assert!(j > last);
                indices.push(j);
            }
            _ => break,
        }
    }
    if indices.len() < 2 {
        return Err(Error::Certification(format!(
            "delayed time does not reach past t = {} within the window; \
             cannot form any decay block",
            grid.node(1.min(grid.steps()))
        )));
    }
    Ok(NodeSequence {
        indices,
        a: grid.a(),
        h: grid.h(),
    })
}
