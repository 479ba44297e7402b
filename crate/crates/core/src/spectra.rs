//! Hermitian spectra, PSD tests and numerical rank. All spectra are computed
//! on the float64 backend; rational matrices convert first.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative tolerance for accepting a matrix as Hermitian before an
/// eigenvalue computation.
const HERMITICITY_RTOL: f64 = 1e-8;

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<Complex64> {
    let (r, c) = (m.rows(), m.cols());
    DMatrix::from_fn(r, c, |i, j| m.get_c64(i, j))
}

fn check_hermitian(m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            m.rows(),
            m.cols()
        )));
    }
    let dev = m.hermitian_deviation();
    let scale = m.max_abs().max(1.0);
    if dev > HERMITICITY_RTOL * scale {
        return Err(Error::NotHermitian { max_dev: dev });
    }
    Ok(())
}

/// All eigenvalues of a Hermitian matrix, ascending. The input is
/// symmetrized (`(M + M†)/2`) before the decomposition so tolerated
/// asymmetry cannot leak into complex eigenvalues.
pub fn hermitian_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let a = to_nalgebra(m);
    let herm = (&a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Eigenvalues and eigenvectors of a Hermitian matrix (ascending order).
/// Columns of the returned matrix are the eigenvectors.
pub fn hermitian_eigen(m: &DenseMatrix) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    check_hermitian(m)?;
    let a = to_nalgebra(m);
    let herm = (&a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = eig.eigenvectors.nrows();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

/// PSD verdict with the minimum eigenvalue as evidence.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// A Hermitian matrix is accepted as PSD when its minimum eigenvalue is at
/// least `-tol`.
pub fn is_psd(m: &DenseMatrix, tol: f64) -> Result<PsdCheck> {
    let vals = hermitian_eigenvalues(m)?;
    let min = vals.first().copied().unwrap_or(f64::INFINITY);
    Ok(PsdCheck { is_psd: min >= -tol, min_eigenvalue: min })
}

/// Singular values, descending.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let a = to_nalgebra(m);
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Number of singular values above `tol` times the largest one.
pub fn numerical_rank(m: &DenseMatrix, tol: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        None | Some(&0.0) => 0,
        Some(&s0) => sv.iter().filter(|&&s| s > tol * s0).count(),
    }
}
