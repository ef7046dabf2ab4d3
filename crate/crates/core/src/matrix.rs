//! Dense complex matrices with finiteness validation.
//!
//! `ComplexMatrix` is a thin wrapper over `nalgebra::DMatrix<Complex64>`
//! whose constructors reject NaN/Inf entries. It carries the shared
//! helpers (adjoint, trace, max-norm deviations, Hermitian eigensolve)
//! used by the operator and SIC layers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("entry count {got} does not match {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, got: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
}

/// A dense complex matrix with all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Wraps a dense matrix, rejecting NaN/Inf entries.
    pub fn new(inner: DMatrix<Complex64>) -> Result<Self, MatrixError> {
        for row in 0..inner.nrows() {
            for col in 0..inner.ncols() {
                let z = inner[(row, col)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(MatrixError::NonFinite { row, col });
                }
            }
        }
        Ok(Self { inner })
    }

    /// Builds from row-major complex entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self, MatrixError> {
        if entries.len() != rows * cols {
            return Err(MatrixError::BadShape {
                rows,
                cols,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds from separate row-major real and imaginary parts.
    pub fn from_re_im(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Result<Self, MatrixError> {
        if re.len() != rows * cols || im.len() != rows * cols {
            return Err(MatrixError::BadShape {
                rows,
                cols,
                got: re.len().max(im.len()),
            });
        }
        let entries: Vec<Complex64> = re
            .iter()
            .zip(im.iter())
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        Self::from_rows(rows, cols, &entries)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            inner: DMatrix::identity(d, d),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.inner.nrows() == self.inner.ncols()
    }

    pub fn require_square(&self) -> Result<usize, MatrixError> {
        if self.is_square() {
            Ok(self.inner.nrows())
        } else {
            Err(MatrixError::NonSquare {
                rows: self.inner.nrows(),
                cols: self.inner.ncols(),
            })
        }
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    /// Largest entry modulus, i.e. the max norm.
    pub fn max_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max norm of `self - other`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        (&self.inner - &other.inner)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_diff(&self, other: &Self) -> f64 {
        (&self.inner - &other.inner).norm()
    }

    /// Max norm of `M - M†`; zero for an exactly Hermitian matrix.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_diff(&self.adjoint())
    }

    /// Max norm of `M†M - I`; zero for an exactly unitary matrix.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.inner.ncols();
        let gram = self.inner.adjoint() * &self.inner;
        (gram - DMatrix::<Complex64>::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Eigendecomposition of the Hermitian part `(M + M†)/2`.
    ///
    /// Returns eigenvalues in ascending order with matching eigenvector
    /// columns. The symmetrization keeps the solve well defined for inputs
    /// that are Hermitian only up to a tolerance.
    pub fn hermitian_eigen(&self) -> HermitianEigen {
        let d = self.inner.nrows();
        let sym = (&self.inner + self.inner.adjoint()).scale(0.5);
        let eig = nalgebra::SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = DMatrix::<Complex64>::zeros(d, d);
        for (new_col, &old_col) in order.iter().enumerate() {
            vectors.set_column(new_col, &eig.eigenvectors.column(old_col));
        }
        HermitianEigen {
            eigenvalues,
            eigenvectors: vectors,
        }
    }

    /// tr(AB) via the elementwise sum `sum_{rs} A_rs B_sr`, without forming
    /// the product matrix.
    pub fn trace_of_product(&self, other: &Self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.inner.nrows() {
            for s in 0..self.inner.ncols() {
                acc += self.inner[(r, s)] * other.inner[(s, r)];
            }
        }
        acc
    }
}

impl std::ops::Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl std::ops::Add<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl std::ops::Sub<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

/// Result of a Hermitian eigensolve: ascending eigenvalues and the matching
/// unitary of eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl HermitianEigen {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Rebuilds `V diag(values) V†` with replacement eigenvalues.
    pub fn recompose_with(&self, values: &[f64]) -> DMatrix<Complex64> {
        let d = self.eigenvectors.nrows();
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for (k, &lambda) in values.iter().enumerate() {
            let v = self.eigenvectors.column(k);
            for r in 0..d {
                for c in 0..d {
                    out[(r, c)] += Complex64::new(lambda, 0.0) * v[r] * v[c].conj();
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_non_finite_entries() {
        let err = ComplexMatrix::from_rows(1, 2, &[c(1.0, 0.0), c(f64::NAN, 0.0)]).unwrap_err();
        assert_eq!(err, MatrixError::NonFinite { row: 0, col: 1 });
    }

    #[test]
    fn rejects_wrong_entry_count() {
        let err = ComplexMatrix::from_rows(2, 2, &[c(1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, MatrixError::BadShape { got: 1, .. }));
    }

    #[test]
    fn hermitian_eigen_sorted_and_recomposes() {
        // Pauli Y has eigenvalues -1, +1.
        let y = ComplexMatrix::from_rows(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
            .unwrap();
        let eig = y.hermitian_eigen();
        assert_abs_diff_eq!(eig.eigenvalues[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.eigenvalues[1], 1.0, epsilon = 1e-12);
        let back = eig.recompose_with(&eig.eigenvalues);
        let back = ComplexMatrix::new(back).unwrap();
        assert!(y.max_diff(&back) < 1e-12);
    }

    #[test]
    fn trace_of_product_matches_full_product() {
        let a = ComplexMatrix::from_rows(2, 2, &[c(1.0, 2.0), c(0.5, 0.0), c(-0.25, 1.0), c(0.0, -1.0)])
            .unwrap();
        let b = ComplexMatrix::from_rows(2, 2, &[c(0.0, 1.0), c(2.0, 0.0), c(1.0, 1.0), c(-1.0, 0.5)])
            .unwrap();
        let direct = (&a * &b).trace();
        let fast = a.trace_of_product(&b);
        assert!((direct - fast).norm() < 1e-13);
    }
}
