//! Reproducible Wiener increments.
//!
//! Each path draws from its own ChaCha stream keyed by `(master_seed,
//! path_index)` — a counter-mode generator, so streams are independent and
//! the draw order of paths is irrelevant. Gaussians come from the inverse
//! normal CDF applied to 53-bit uniforms, keeping the mapping one-draw-
//! one-sample and bit-reproducible across thread counts.
//!
//! Coupled trajectory pairs share one `WienerPath`: the common noise under
//! which mean-square deviations are defined.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::integrator::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    pub master_seed: u64,
    pub path_index: u64,
    steps: usize,
    wiener_dim: usize,
    /// Row n holds the m increments of step n, each `~ N(0, h)`.
    increments: Vec<f64>,
}

impl WienerPath {
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn wiener_dim(&self) -> usize {
        self.wiener_dim
    }

    /// The m increments of step `n`.
    pub fn increment(&self, n: usize) -> &[f64] {
        &self.increments[n * self.wiener_dim..(n + 1) * self.wiener_dim]
    }

    pub fn all(&self) -> &[f64] {
        &self.increments
    }

    /// `w(t_n) - w(a)` per component, by summing increments.
    pub fn accumulated(&self, n: usize) -> Vec<f64> {
        let mut acc = vec![0.0; self.wiener_dim];
        for step in 0..n {
            for (j, a) in acc.iter_mut().enumerate() {
                *a += self.increments[step * self.wiener_dim + j];
            }
        }
        acc
    }
}

/// `N·m` independent `N(0, h)` draws for path `path_index` of the ensemble
/// keyed by `master_seed`.
pub fn wiener_increments(
    master_seed: u64,
    path_index: u64,
    grid: &Grid,
    wiener_dim: usize,
) -> WienerPath {
    assert!(wiener_dim >= 1, "wiener dimension must be >= 1");
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index);
    let normal = Normal::standard();
    let sqrt_h = grid.h().sqrt();
    let count = grid.steps() * wiener_dim;
    let mut increments = Vec::with_capacity(count);
    for _ in 0..count {
        // (0, 1) strictly: offset the 53-bit integer by half a unit
        let u = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
        increments.push(normal.inverse_cdf(u) * sqrt_h);
    }
    WienerPath {
        master_seed,
        path_index,
        steps: grid.steps(),
        wiener_dim,
        increments,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_variance_match_n0h() {
        let grid = Grid::new(0.0, 10_000.0, 1_000_000).unwrap(); // h = 0.01
        let path = wiener_increments(42, 0, &grid, 1);
        let n = path.all().len() as f64;
        let mean = path.all().iter().sum::<f64>() / n;
        let var = path.all().iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        // mean within 4·sqrt(h/n), variance within 3·h·sqrt(2/n)
        assert!(mean.abs() < 4.0 * (0.01f64 / n).sqrt(), "mean = {mean}");
        assert!(
            (var - 0.01).abs() < 3.0 * 0.01 * (2.0 / n).sqrt(),
            "var = {var}"
        );
    }

    #[test]
    fn same_key_same_path() {
        let grid = Grid::new(0.0, 1.0, 64).unwrap();
        let p1 = wiener_increments(7, 3, &grid, 2);
        let p2 = wiener_increments(7, 3, &grid, 2);
        assert_eq!(p1, p2);
    }

    #[test]
    fn different_paths_differ() {
        let grid = Grid::new(0.0, 1.0, 64).unwrap();
        let p1 = wiener_increments(7, 3, &grid, 1);
        let p2 = wiener_increments(7, 4, &grid, 1);
        assert_ne!(p1.all(), p2.all());
        let p3 = wiener_increments(8, 3, &grid, 1);
        assert_ne!(p1.all(), p3.all());
    }

    #[test]
    fn accumulated_sums_increments() {
        let grid = Grid::new(0.0, 1.0, 8).unwrap();
        let p = wiener_increments(1, 0, &grid, 2);
        let acc = p.accumulated(3);
        let by_hand: f64 = (0..3).map(|n| p.increment(n)[1]).sum();
        assert_eq!(acc[1], by_hand);
    }
}
