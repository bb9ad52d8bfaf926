//! State vectors in ℂ^d and small dense complex matrices.
//!
//! Real problems are the special case of zero imaginary parts, so a single
//! complex code path serves both. The inner product is the usual Hermitian
//! one, `⟨x, y⟩ = Σ conj(x_i)·y_i`, and the matrix norm is the Frobenius
//! norm `|A| = sqrt(trace(A*A))`.

use num_complex::Complex64;

/// A point of the state space ℂ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    entries: Vec<Complex64>,
}

impl StateVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![Complex64::ZERO; dim],
        }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self {
            entries: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    /// Scalar (d = 1) state from a real value.
    pub fn scalar(value: f64) -> Self {
        Self::from_real(&[value])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> Complex64 {
        self.entries[i]
    }

    /// Squared Euclidean norm `Σ |x_i|²`.
    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Real part of the Hermitian inner product, `Re Σ conj(x_i)·y_i`.
    pub fn re_inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| (x.conj() * y).re)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| x + y)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| x - y)
                .collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }

    /// `w1·self + w2·other` — the workhorse of piecewise-linear interpolation.
    pub fn affine(&self, w1: f64, other: &Self, w2: f64) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| x * w1 + y * w2)
                .collect(),
        }
    }
}

/// Dense complex matrix, row-major. Diffusion coefficients are d×m where m
/// is the Wiener dimension; the linear-family coefficients are d×d.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged matrix rows");
        Self {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)).collect())
                .collect(),
        )
    }

    /// 1×1 matrix from a complex scalar.
    pub fn scalar(z: Complex64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![z],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.cols + j] = value;
    }

    /// Frobenius norm `sqrt(Σ |a_ij|²)`, i.e. `sqrt(trace(A*A))`.
    pub fn trace_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Matrix times a real vector (the Wiener increment), yielding a state.
    pub fn mul_real_vec(&self, v: &[f64]) -> StateVector {
        debug_assert_eq!(self.cols, v.len());
        let mut out = vec![Complex64::ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::ZERO;
            for j in 0..self.cols {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        StateVector::new(out)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}
