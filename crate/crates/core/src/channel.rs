//! Linear maps between matrix algebras as coefficient tensors, and the
//! Choi–Jamiolkowski conversion in both directions.
//!
//! A map `φ: M_n → M_m` is stored as the 4-index tensor `c[k][l][i][j]`:
//! the coefficient of input entry `(i,j)` in output entry `(k,l)`. Its Choi
//! matrix is the `n·m` square matrix whose block `(i,j)` equals `φ(e_ij)`,
//! i.e. `C[(i,k),(j,l)] = c[k][l][i][j]`. Composition is the contraction
//! over the shared pair of indices, which makes the tensor, flattened to an
//! `m²×n²` transfer matrix, multiplicative under composition.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Grid, Subsystem};
use crate::scalar::{Backend, CRat, Scalar, C64};
use crate::spectra;
use num::{BigInt, Zero};
use serde::{Deserialize, Serialize};

/// Coefficient tensor over one scalar type. Storage is flat with index
/// `((k·m + l)·n + i)·n + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    in_dim: usize,
    out_dim: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Tensor {
            in_dim,
            out_dim,
            coeffs: vec![T::zero(); out_dim * out_dim * in_dim * in_dim],
        }
    }

    pub fn from_vec(in_dim: usize, out_dim: usize, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != out_dim * out_dim * in_dim * in_dim {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for extents {out_dim}x{out_dim}x{in_dim}x{in_dim}",
                coeffs.len()
            )));
        }
        Ok(Tensor { in_dim, out_dim, coeffs })
    }

    #[inline]
    pub fn idx(&self, k: usize, l: usize, i: usize, j: usize) -> usize {
        ((k * self.out_dim + l) * self.in_dim + i) * self.in_dim + j
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize, i: usize, j: usize) -> &T {
        &self.coeffs[self.idx(k, l, i, j)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, l: usize, i: usize, j: usize, v: T) {
        let at = self.idx(k, l, i, j);
        self.coeffs[at] = v;
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn map<S: Scalar>(&self, f: impl Fn(&T) -> S) -> Tensor<S> {
        Tensor {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    fn apply(&self, x: &Grid<T>) -> Grid<T> {
        let (n, m) = (self.in_dim, self.out_dim);
        let mut out = Grid::zeros(m, m);
        for k in 0..m {
            for l in 0..m {
                let mut acc = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        let c = self.get(k, l, i, j);
                        if !c.is_zero_entry() {
                            acc = acc + c.clone() * x.get(i, j).clone();
                        }
                    }
                }
                out.set(k, l, acc);
            }
        }
        out
    }

    fn compose(outer: &Tensor<T>, inner: &Tensor<T>) -> Tensor<T> {
        let (n, b, m) = (inner.in_dim, inner.out_dim, outer.out_dim);
        let mut out: Tensor<T> = Tensor::zeros(n, m);
        for p in 0..m {
            for q in 0..m {
                for k in 0..b {
                    for l in 0..b {
                        let o = outer.get(p, q, k, l);
                        if o.is_zero_entry() {
                            continue;
                        }
                        for i in 0..n {
                            for j in 0..n {
                                let v = out.get(p, q, i, j).clone()
                                    + o.clone() * inner.get(k, l, i, j).clone();
                                out.set(p, q, i, j, v);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn choi(&self) -> Grid<T> {
        let (n, m) = (self.in_dim, self.out_dim);
        let mut c = Grid::zeros(n * m, n * m);
        for k in 0..m {
            for l in 0..m {
                for i in 0..n {
                    for j in 0..n {
                        c.set(i * m + k, j * m + l, self.get(k, l, i, j).clone());
                    }
                }
            }
        }
        c
    }

    fn from_choi(grid: &Grid<T>, n: usize, m: usize) -> Tensor<T> {
        let mut t = Tensor::zeros(n, m);
        for k in 0..m {
            for l in 0..m {
                for i in 0..n {
                    for j in 0..n {
                        t.set(k, l, i, j, grid.get(i * m + k, j * m + l).clone());
                    }
                }
            }
        }
        t
    }
}

/// Coefficient tensor of a linear map `M_n → M_m`, on either scalar
/// backend.
#[derive(Clone, Debug, PartialEq)]
pub enum LinearMapTensor {
    F64(Tensor<C64>),
    Rational(Tensor<CRat>),
}

impl LinearMapTensor {
    pub fn zeros(in_dim: usize, out_dim: usize, backend: Backend) -> Self {
        match backend {
            Backend::Float64 => LinearMapTensor::F64(Tensor::zeros(in_dim, out_dim)),
            Backend::Rational => LinearMapTensor::Rational(Tensor::zeros(in_dim, out_dim)),
        }
    }

    /// The identity map on `M_n`.
    pub fn identity(n: usize, backend: Backend) -> Self {
        let mut t = Self::zeros(n, n, backend);
        for k in 0..n {
            for l in 0..n {
                t.set_one(k, l, k, l);
            }
        }
        t
    }

    /// The transpose map `x ↦ xᵗ` on `M_n`.
    pub fn transpose_map(n: usize, backend: Backend) -> Self {
        let mut t = Self::zeros(n, n, backend);
        for k in 0..n {
            for l in 0..n {
                t.set_one(k, l, l, k);
            }
        }
        t
    }

    /// The map `x ↦ tr(x)·I_n − s·x` for a rational scale `s = num/den`.
    /// With `s = 0` this is `x ↦ tr(x)·I` (Choi matrix the identity).
    pub fn reduction_style_map(n: usize, num: i64, den: i64) -> Self {
        let mut t = Tensor::<CRat>::zeros(n, n);
        let s = CRat::new(crate::scalar::rat(num, den), num::BigRational::zero());
        for k in 0..n {
            for i in 0..n {
                // tr(x) I contributes x_ii to every diagonal output entry
                let v = t.get(k, k, i, i).clone() + <CRat as Scalar>::one();
                t.set(k, k, i, i, v);
            }
            for l in 0..n {
                let v = t.get(k, l, k, l).clone() - s.clone();
                t.set(k, l, k, l, v);
            }
        }
        LinearMapTensor::Rational(t)
    }

    fn set_one(&mut self, k: usize, l: usize, i: usize, j: usize) {
        match self {
            LinearMapTensor::F64(t) => t.set(k, l, i, j, <C64 as Scalar>::one()),
            LinearMapTensor::Rational(t) => t.set(k, l, i, j, <CRat as Scalar>::one()),
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            LinearMapTensor::F64(t) => t.in_dim,
            LinearMapTensor::Rational(t) => t.in_dim,
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            LinearMapTensor::F64(t) => t.out_dim,
            LinearMapTensor::Rational(t) => t.out_dim,
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            LinearMapTensor::F64(_) => Backend::Float64,
            LinearMapTensor::Rational(_) => Backend::Rational,
        }
    }

    pub fn get_c64(&self, k: usize, l: usize, i: usize, j: usize) -> C64 {
        match self {
            LinearMapTensor::F64(t) => *t.get(k, l, i, j),
            LinearMapTensor::Rational(t) => t.get(k, l, i, j).to_c64(),
        }
    }

    pub fn to_f64(&self) -> LinearMapTensor {
        match self {
            LinearMapTensor::F64(_) => self.clone(),
            LinearMapTensor::Rational(t) => LinearMapTensor::F64(t.map(|v| v.to_c64())),
        }
    }

    pub fn as_f64_tensor(&self) -> Tensor<C64> {
        match self {
            LinearMapTensor::F64(t) => t.clone(),
            LinearMapTensor::Rational(t) => t.map(|v| v.to_c64()),
        }
    }

    pub fn as_rational(&self) -> Option<&Tensor<CRat>> {
        match self {
            LinearMapTensor::Rational(t) => Some(t),
            LinearMapTensor::F64(_) => None,
        }
    }

    /// Build a float64 tensor from real coefficients, flat in
    /// `((k·m+l)·n+i)·n+j` order.
    pub fn from_real_coeffs(in_dim: usize, out_dim: usize, coeffs: &[f64]) -> Result<Self> {
        let data = coeffs.iter().map(|&v| C64::new(v, 0.0)).collect();
        Ok(LinearMapTensor::F64(Tensor::from_vec(in_dim, out_dim, data)?))
    }

    /// Rational tensor from integer fractions, flat order as above.
    pub fn from_int_fractions(in_dim: usize, out_dim: usize, entries: &[(i64, i64)]) -> Result<Self> {
        let data = entries
            .iter()
            .map(|&(n, d)| CRat::new(num::BigRational::new(BigInt::from(n), BigInt::from(d)), num::BigRational::zero()))
            .collect();
        Ok(LinearMapTensor::Rational(Tensor::from_vec(in_dim, out_dim, data)?))
    }

    pub fn eq_exact(&self, other: &Self) -> bool {
        match (self, other) {
            (LinearMapTensor::Rational(a), LinearMapTensor::Rational(b)) => a == b,
            _ => false,
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.in_dim() != other.in_dim() || self.out_dim() != other.out_dim() {
            return false;
        }
        let (n, m) = (self.in_dim(), self.out_dim());
        for k in 0..m {
            for l in 0..m {
                for i in 0..n {
                    for j in 0..n {
                        if (self.get_c64(k, l, i, j) - other.get_c64(k, l, i, j)).norm() > tol {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Direct check of `c[k][l][i][j] = conj(c[l][k][j][i])`.
    pub fn is_hermiticity_preserving(&self, tol: f64) -> bool {
        let (n, m) = (self.in_dim(), self.out_dim());
        for k in 0..m {
            for l in 0..m {
                for i in 0..n {
                    for j in 0..n {
                        let d = self.get_c64(k, l, i, j) - self.get_c64(l, k, j, i).conj();
                        if d.norm() > tol {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// A Choi matrix together with the `(input, output)` dimensions it
/// represents. Hermitian exactly when the map preserves hermiticity; PSD
/// exactly when the map is completely positive, so positivity is not part
/// of construction here.
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    matrix: DenseMatrix,
    in_dim: usize,
    out_dim: usize,
}

impl ChoiMatrix {
    pub fn new(matrix: DenseMatrix, in_dim: usize, out_dim: usize) -> Result<Self> {
        let side = in_dim * out_dim;
        if matrix.rows() != side || matrix.cols() != side {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} Choi matrix for dims ({in_dim}, {out_dim})",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(ChoiMatrix { matrix, in_dim, out_dim })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn side(&self) -> usize {
        self.in_dim * self.out_dim
    }

    /// The bipartite cut (input system, output system).
    pub fn cut(&self) -> (usize, usize) {
        (self.in_dim, self.out_dim)
    }

    /// Partial transpose over the input system.
    pub fn partial_transpose(&self) -> DenseMatrix {
        self.matrix
            .partial_transpose(self.in_dim, self.out_dim, Subsystem::A)
            .expect("choi matrix side is consistent by construction")
    }

    /// View as a validated bipartite state (fails when not PSD).
    pub fn as_state(&self) -> Result<crate::state::BipartiteState> {
        crate::state::BipartiteState::new(self.matrix.clone(), self.in_dim, self.out_dim)
    }
}

/// Choi matrix of a map: block `(i,j)` of the result is `φ(e_ij)`.
pub fn choi_of_map(map: &LinearMapTensor) -> ChoiMatrix {
    let m = match map {
        LinearMapTensor::F64(t) => DenseMatrix::F64(t.choi()),
        LinearMapTensor::Rational(t) => DenseMatrix::Rational(t.choi()),
    };
    ChoiMatrix::new(m, map.in_dim(), map.out_dim()).expect("choi dims are consistent")
}

/// Exact inverse of [`choi_of_map`] for a declared `(n, m)` reading of a
/// square matrix of side `n·m`.
pub fn map_of_choi(matrix: &DenseMatrix, in_dim: usize, out_dim: usize) -> Result<LinearMapTensor> {
    let side = in_dim * out_dim;
    if matrix.rows() != side || matrix.cols() != side {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix read as a Choi matrix with dims ({in_dim}, {out_dim})",
            matrix.rows(),
            matrix.cols()
        )));
    }
    Ok(match matrix {
        DenseMatrix::F64(g) => LinearMapTensor::F64(Tensor::from_choi(g, in_dim, out_dim)),
        DenseMatrix::Rational(g) => {
            LinearMapTensor::Rational(Tensor::from_choi(g, in_dim, out_dim))
        }
    })
}

/// Apply a map to an `n×n` matrix: `out[k,l] = Σ_{ij} c[k][l][i][j]·x[i,j]`.
pub fn apply(map: &LinearMapTensor, x: &DenseMatrix) -> Result<DenseMatrix> {
    let n = map.in_dim();
    if x.rows() != n || x.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "map with input dimension {n} applied to a {}x{} matrix",
            x.rows(),
            x.cols()
        )));
    }
    Ok(match (map, x) {
        (LinearMapTensor::Rational(t), DenseMatrix::Rational(g)) => {
            DenseMatrix::Rational(t.apply(g))
        }
        (m, x) => DenseMatrix::F64(m.as_f64_tensor().apply(&x.to_f64_grid())),
    })
}

/// Composition `outer ∘ inner` as a tensor contraction:
/// `d[p][q][i][j] = Σ_{k,l} outer[p][q][k][l]·inner[k][l][i][j]`.
pub fn compose(outer: &LinearMapTensor, inner: &LinearMapTensor) -> Result<LinearMapTensor> {
    if inner.out_dim() != outer.in_dim() {
        return Err(Error::DimensionMismatch(format!(
            "inner output dimension {} vs outer input dimension {}",
            inner.out_dim(),
            outer.in_dim()
        )));
    }
    Ok(match (outer, inner) {
        (LinearMapTensor::Rational(o), LinearMapTensor::Rational(i)) => {
            LinearMapTensor::Rational(Tensor::compose(o, i))
        }
        (o, i) => LinearMapTensor::F64(Tensor::compose(&o.as_f64_tensor(), &i.as_f64_tensor())),
    })
}

/// Channel-property predicates, all evaluated through the Choi matrix.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChannelProperties {
    pub is_cp: bool,
    pub is_ccp: bool,
    pub is_ppt_map: bool,
    pub is_trace_preserving: bool,
    pub is_unital: bool,
    pub is_hermiticity_preserving: bool,
    pub min_eig_choi: f64,
    pub min_eig_choi_pt: f64,
}

/// Complete positivity is PSD-ness of the Choi matrix; complete
/// copositivity is PSD-ness of its partial transpose. Trace preservation
/// and unitality are checked directly on the tensor.
pub fn channel_properties(map: &LinearMapTensor, tol: f64) -> Result<ChannelProperties> {
    let (n, m) = (map.in_dim(), map.out_dim());
    let choi = choi_of_map(map);
    let herm = map.is_hermiticity_preserving(tol.max(0.0) + 1e-12);
    let (cp, ccp, min_c, min_pt) = if herm {
        let c = spectra::is_psd(choi.matrix(), tol)?;
        let p = spectra::is_psd(&choi.partial_transpose(), tol)?;
        (c.is_psd, p.is_psd, c.min_eigenvalue, p.min_eigenvalue)
    } else {
        (false, false, f64::NAN, f64::NAN)
    };

    // trace preserving: Σ_k c[k][k][i][j] = δ_ij
    let mut tp = true;
    'outer: for i in 0..n {
        for j in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..m {
                s += map.get_c64(k, k, i, j);
            }
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            if (s - target).norm() > tol {
                tp = false;
                break 'outer;
            }
        }
    }

    let id_in = DenseMatrix::identity(n, Backend::Float64);
    let id_out = DenseMatrix::identity(m, Backend::Float64);
    let unital = apply(&map.to_f64(), &id_in)?.approx_eq(&id_out, tol);

    Ok(ChannelProperties {
        is_cp: cp,
        is_ccp: ccp,
        is_ppt_map: cp && ccp,
        is_trace_preserving: tp,
        is_unital: unital,
        is_hermiticity_preserving: herm,
        min_eig_choi: min_c,
        min_eig_choi_pt: min_pt,
    })
}

/// Rescale a map so its Choi matrix has trace `n` (the trace of a
/// trace-preserving map's Choi matrix). Fails when the Choi trace is zero.
pub fn normalize_trace(map: &LinearMapTensor) -> Result<LinearMapTensor> {
    let n = map.in_dim() as f64;
    let tr = choi_of_map(map).matrix().trace();
    if tr.norm() < 1e-300 {
        return Err(Error::InvalidArgument("Choi trace is zero".into()));
    }
    let t = map.as_f64_tensor();
    let s = C64::new(n, 0.0) / tr;
    Ok(LinearMapTensor::F64(t.map(|v| v * s)))
}
