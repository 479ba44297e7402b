//! Bipartite states: density-matrix-like objects carrying their tensor cut.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::spectra;
use crate::DEFAULT_PSD_TOL;

/// A square matrix on a composite system together with its factor
/// dimensions. Construction validates Hermiticity and positivity; the trace
/// is cached as float64.
#[derive(Clone, Debug)]
pub struct BipartiteState {
    matrix: DenseMatrix,
    dim_a: usize,
    dim_b: usize,
    trace: f64,
}

impl BipartiteState {
    pub fn new(matrix: DenseMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        Self::with_psd_tol(matrix, dim_a, dim_b, DEFAULT_PSD_TOL)
    }

    pub fn with_psd_tol(
        matrix: DenseMatrix,
        dim_a: usize,
        dim_b: usize,
        psd_tol: f64,
    ) -> Result<Self> {
        check_cut(&matrix, dim_a, dim_b)?;
        // hermiticity is exact on the rational backend, tolerance-based on
        // float64 (inside is_psd)
        if let Some(g) = matrix.as_rational() {
            if *g != g.conj_transpose() {
                return Err(Error::NotHermitian { max_dev: matrix.hermitian_deviation() });
            }
        }
        let check = spectra::is_psd(&matrix, psd_tol)?;
        if !check.is_psd {
            return Err(Error::NotPsd { min_eig: check.min_eigenvalue });
        }
        let trace = matrix.trace_re();
        Ok(BipartiteState { matrix, dim_a, dim_b, trace })
    }

    /// Reinterpret the same matrix under a different tensor cut.
    pub fn recut(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        check_cut(&self.matrix, dim_a, dim_b)?;
        Ok(BipartiteState {
            matrix: self.matrix.clone(),
            dim_a,
            dim_b,
            trace: self.trace,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn side(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// Trace-one copy on the float64 backend.
    pub fn normalized_matrix(&self) -> Result<DenseMatrix> {
        if self.trace <= 0.0 {
            return Err(Error::InvalidArgument("state has nonpositive trace".into()));
        }
        Ok(self.matrix.scale_f64(1.0 / self.trace))
    }
}

pub(crate) fn check_cut(matrix: &DenseMatrix, dim_a: usize, dim_b: usize) -> Result<()> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::InvalidArgument("zero factor dimension".into()));
    }
    let side = dim_a * dim_b;
    if matrix.rows() != side || matrix.cols() != side {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix under a {dim_a}x{dim_b} cut",
            matrix.rows(),
            matrix.cols()
        )));
    }
    Ok(())
}
