//! Largest eigenvalue of a Hermitian matrix via cyclic Jacobi sweeps.
//!
//! A Hermitian `H = X + iY` embeds as the real symmetric matrix
//! `[[X, -Y], [Y, X]]` with the same spectrum (doubled multiplicities), so a
//! plain real Jacobi iteration suffices and no external solver is needed.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ComplexMatrix;

const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;

/// `(A* + A)/2`.
pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    let adj = a.adjoint();
    let d = a.rows();
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out.set(i, j, (a.get(i, j) + adj.get(i, j)) * Complex64::new(0.5, 0.0));
        }
    }
    out
}

/// Largest eigenvalue of a Hermitian matrix. Errors on non-square or
/// non-finite input; Hermitian symmetry is the caller's contract (the
/// embedding symmetrizes roundoff-level asymmetry away).
pub fn max_eigenvalue_hermitian(h: &ComplexMatrix) -> Result<f64> {
    let d = h.rows();
    if d == 0 || h.cols() != d {
        return Err(Error::Parameter(format!(
            "eigenvalue solver needs a nonempty square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    if !h.is_finite() {
        return Err(Error::Parameter("matrix entries must be finite".into()));
    }

    // real symmetric embedding, symmetrized to kill roundoff drift
    let n = 2 * d;
    let mut s = vec![0.0f64; n * n];
    for i in 0..d {
        for j in 0..d {
            let z = h.get(i, j);
            let w = h.get(j, i);
            let x = 0.5 * (z.re + w.re);
            let y = 0.5 * (z.im - w.im);
            s[i * n + j] = x;
            s[(i + d) * n + (j + d)] = x;
            s[i * n + (j + d)] = -y;
            s[(i + d) * n + j] = y;
        }
    }

    let frob: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = OFF_DIAGONAL_TOL * frob.max(1.0);

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * s[p * n + q] * s[p * n + q];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = s[p * n + q];
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = s[p * n + p];
                let aqq = s[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cos = 1.0 / (t * t + 1.0).sqrt();
                let sin = t * cos;
                for k in 0..n {
                    let skp = s[k * n + p];
                    let skq = s[k * n + q];
                    s[k * n + p] = cos * skp - sin * skq;
                    s[k * n + q] = sin * skp + cos * skq;
                }
                for k in 0..n {
                    let spk = s[p * n + k];
                    let sqk = s[q * n + k];
                    s[p * n + k] = cos * spk - sin * sqk;
                    s[q * n + k] = sin * spk + cos * sqk;
                }
            }
        }
    }

    Ok((0..n).map(|i| s[i * n + i]).fold(f64::NEG_INFINITY, f64::max))
}
