//! Dense complex matrices with dual scalar backends, plus the structure
//! operations (Kronecker product, partial transpose) every other module
//! builds on.
//!
//! Composite indices follow the block layout of Choi matrices throughout:
//! the pair `(i, k)` with `i < dim_a`, `k < dim_b` maps to `i * dim_b + k`.

use crate::error::{Error, Result};
use crate::scalar::{rat_to_f64, Backend, CRat, Rat, Scalar, C64};
use num::Zero;

/// Which tensor factor of a bipartite matrix an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Row-major dense storage over one scalar type.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Grid { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut g = Grid::zeros(n, n);
        for i in 0..n {
            g.set(i, i, T::one());
        }
        g
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Grid { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn map<S: Scalar>(&self, f: impl Fn(&T) -> S) -> Grid<S> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Grid::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Grid::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conjugate());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.clone() - b.clone())
    }

    fn zip(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Grid {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out: Grid<T> = Grid::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero_entry() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j).clone() + a.clone() * other.get(k, j).clone();
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> T {
        let n = self.rows.min(self.cols);
        (0..n).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    /// Standard Kronecker product; block `(i, j)` of the result is
    /// `self[i, j] * other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Grid::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero_entry() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(
                            i * other.rows + k,
                            j * other.cols + l,
                            a.clone() * other.get(k, l).clone(),
                        );
                    }
                }
            }
        }
        out
    }

    /// Partial transpose of a square bipartite matrix. For subsystem A the
    /// block indices swap, `out[(j,k),(i,l)] = m[(i,k),(j,l)]`; for B the
    /// inner indices swap. On `A ⊗ B` inputs this yields `Aᵗ ⊗ B`
    /// (respectively `A ⊗ Bᵗ`).
    pub fn partial_transpose(&self, dim_a: usize, dim_b: usize, sub: Subsystem) -> Result<Self> {
        let side = dim_a * dim_b;
        if self.rows != side || self.cols != side {
            return Err(Error::DimensionMismatch(format!(
                "partial transpose of a {}x{} matrix with cut {dim_a}x{dim_b}",
                self.rows, self.cols
            )));
        }
        let mut out = Grid::zeros(side, side);
        for i in 0..dim_a {
            for j in 0..dim_a {
                for k in 0..dim_b {
                    for l in 0..dim_b {
                        let v = self.get(i * dim_b + k, j * dim_b + l).clone();
                        match sub {
                            Subsystem::A => out.set(j * dim_b + k, i * dim_b + l, v),
                            Subsystem::B => out.set(i * dim_b + l, j * dim_b + k, v),
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise deviation from Hermitian symmetry, as float64.
    pub fn hermitian_deviation(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut max = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = self.get(i, j).to_c64() - self.get(j, i).to_c64().conj();
                max = max.max(d.norm());
            }
        }
        max
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.to_c64().norm()).fold(0.0, f64::max)
    }
}

impl Grid<C64> {
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Dense complex matrix carrying either float64 or exact-rational scalars.
///
/// Rational matrices compare exactly and convert losslessly to float64;
/// spectra are only defined after that conversion.
#[derive(Clone, Debug, PartialEq)]
pub enum DenseMatrix {
    F64(Grid<C64>),
    Rational(Grid<CRat>),
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize, backend: Backend) -> Self {
        match backend {
            Backend::Float64 => DenseMatrix::F64(Grid::zeros(rows, cols)),
            Backend::Rational => DenseMatrix::Rational(Grid::zeros(rows, cols)),
        }
    }

    pub fn identity(n: usize, backend: Backend) -> Self {
        match backend {
            Backend::Float64 => DenseMatrix::F64(Grid::identity(n)),
            Backend::Rational => DenseMatrix::Rational(Grid::identity(n)),
        }
    }

    pub fn from_f64_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&v| C64::new(v, 0.0)));
        }
        DenseMatrix::F64(Grid { rows: r, cols: c, data })
    }

    pub fn from_complex_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        Ok(DenseMatrix::F64(Grid::from_vec(rows, cols, data)?))
    }

    pub fn from_rational_vec(rows: usize, cols: usize, data: Vec<CRat>) -> Result<Self> {
        Ok(DenseMatrix::Rational(Grid::from_vec(rows, cols, data)?))
    }

    /// Rational matrix from integer-pair entries, row-major.
    pub fn from_int_fractions(rows: usize, cols: usize, entries: &[(i64, i64)]) -> Result<Self> {
        let data = entries
            .iter()
            .map(|&(n, d)| CRat::new(Rat::new(n.into(), d.into()), Rat::zero()))
            .collect();
        Self::from_rational_vec(rows, cols, data)
    }

    pub fn backend(&self) -> Backend {
        match self {
            DenseMatrix::F64(_) => Backend::Float64,
            DenseMatrix::Rational(_) => Backend::Rational,
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            DenseMatrix::F64(g) => g.rows(),
            DenseMatrix::Rational(g) => g.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            DenseMatrix::F64(g) => g.cols(),
            DenseMatrix::Rational(g) => g.cols(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Entry as float64 complex, whichever the backend.
    pub fn get_c64(&self, i: usize, j: usize) -> C64 {
        match self {
            DenseMatrix::F64(g) => *g.get(i, j),
            DenseMatrix::Rational(g) => g.get(i, j).to_c64(),
        }
    }

    pub fn get_rational(&self, i: usize, j: usize) -> Option<&CRat> {
        match self {
            DenseMatrix::F64(_) => None,
            DenseMatrix::Rational(g) => Some(g.get(i, j)),
        }
    }

    /// Total conversion to the float64 backend.
    pub fn to_f64(&self) -> DenseMatrix {
        DenseMatrix::F64(self.to_f64_grid())
    }

    pub fn to_f64_grid(&self) -> Grid<C64> {
        match self {
            DenseMatrix::F64(g) => g.clone(),
            DenseMatrix::Rational(g) => g.map(|v| v.to_c64()),
        }
    }

    pub fn as_rational(&self) -> Option<&Grid<CRat>> {
        match self {
            DenseMatrix::Rational(g) => Some(g),
            DenseMatrix::F64(_) => None,
        }
    }

    fn binary(
        &self,
        other: &Self,
        f_f: impl Fn(&Grid<C64>, &Grid<C64>) -> Result<Grid<C64>>,
        f_r: impl Fn(&Grid<CRat>, &Grid<CRat>) -> Result<Grid<CRat>>,
    ) -> Result<Self> {
        match (self, other) {
            (DenseMatrix::F64(a), DenseMatrix::F64(b)) => Ok(DenseMatrix::F64(f_f(a, b)?)),
            (DenseMatrix::Rational(a), DenseMatrix::Rational(b)) => {
                Ok(DenseMatrix::Rational(f_r(a, b)?))
            }
            // mixed backends promote to float64
            (a, b) => Ok(DenseMatrix::F64(f_f(&a.to_f64_grid(), &b.to_f64_grid())?)),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.binary(other, Grid::add, Grid::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.binary(other, Grid::sub, Grid::sub)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.binary(other, Grid::matmul, Grid::matmul)
    }

    pub fn kron(&self, other: &Self) -> Self {
        self.binary(other, |a, b| Ok(a.kron(b)), |a, b| Ok(a.kron(b)))
            .expect("kron is total")
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        DenseMatrix::F64(self.to_f64_grid().scale(&C64::new(s, 0.0)))
    }

    pub fn scale_rational(&self, s: &Rat) -> Result<Self> {
        match self {
            DenseMatrix::Rational(g) => Ok(DenseMatrix::Rational(
                g.scale(&CRat::new(s.clone(), Rat::zero())),
            )),
            DenseMatrix::F64(_) => Err(Error::RequiresFloat(
                "rational scaling of a float64 matrix".into(),
            )),
        }
    }

    pub fn transpose(&self) -> Self {
        match self {
            DenseMatrix::F64(g) => DenseMatrix::F64(g.transpose()),
            DenseMatrix::Rational(g) => DenseMatrix::Rational(g.transpose()),
        }
    }

    pub fn conj_transpose(&self) -> Self {
        match self {
            DenseMatrix::F64(g) => DenseMatrix::F64(g.conj_transpose()),
            DenseMatrix::Rational(g) => DenseMatrix::Rational(g.conj_transpose()),
        }
    }

    pub fn partial_transpose(&self, dim_a: usize, dim_b: usize, sub: Subsystem) -> Result<Self> {
        match self {
            DenseMatrix::F64(g) => Ok(DenseMatrix::F64(g.partial_transpose(dim_a, dim_b, sub)?)),
            DenseMatrix::Rational(g) => {
                Ok(DenseMatrix::Rational(g.partial_transpose(dim_a, dim_b, sub)?))
            }
        }
    }

    pub fn trace(&self) -> C64 {
        match self {
            DenseMatrix::F64(g) => g.trace(),
            DenseMatrix::Rational(g) => g.trace().to_c64(),
        }
    }

    pub fn trace_rational(&self) -> Option<CRat> {
        self.as_rational().map(Grid::trace)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        match self {
            DenseMatrix::F64(g) => g.hermitian_deviation(),
            DenseMatrix::Rational(g) => g.hermitian_deviation(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            DenseMatrix::F64(g) => g.max_abs(),
            DenseMatrix::Rational(g) => g.max_abs(),
        }
    }

    /// Exact equality. Only meaningful when both sides carry the rational
    /// backend (float64 comparisons should use [`DenseMatrix::approx_eq`]).
    pub fn eq_exact(&self, other: &Self) -> bool {
        match (self, other) {
            (DenseMatrix::Rational(a), DenseMatrix::Rational(b)) => a == b,
            _ => false,
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return false;
        }
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                if (self.get_c64(i, j) - other.get_c64(i, j)).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        self.to_f64_grid().frobenius_distance(&other.to_f64_grid())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.to_f64_grid()
            .data()
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Real part of the trace, exact-to-float for rationals.
    pub fn trace_re(&self) -> f64 {
        match self {
            DenseMatrix::F64(g) => g.trace().re,
            DenseMatrix::Rational(g) => rat_to_f64(&g.trace().re),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::crat;

    fn rational_from_ints(rows: usize, cols: usize, vals: &[i64]) -> DenseMatrix {
        let data: Vec<CRat> = vals.iter().map(|&v| crat(v, 1)).collect();
        DenseMatrix::from_rational_vec(rows, cols, data).unwrap()
    }

    /// A ⊗ B and its partial transposes for the 3x3/2x2 pair whose products
    /// are pinned as fixtures.
    fn fixture_pair() -> (DenseMatrix, DenseMatrix) {
        let a = rational_from_ints(3, 3, &[1, 2, 1, 2, 1, 2, 1, 2, 1]);
        let b = rational_from_ints(2, 2, &[0, 1, -1, 0]);
        (a, b)
    }

    #[test]
    fn kron_matches_displayed_6x6() {
        let (a, b) = fixture_pair();
        let expected = rational_from_ints(
            6,
            6,
            &[
                0, 1, 0, 2, 0, 1, //
                -1, 0, -2, 0, -1, 0, //
                0, 2, 0, 1, 0, 2, //
                -2, 0, -1, 0, -2, 0, //
                0, 1, 0, 2, 0, 1, //
                -1, 0, -2, 0, -1, 0,
            ],
        );
        assert!(a.kron(&b).eq_exact(&expected));
    }

    #[test]
    fn kron_identity() {
        let i2 = DenseMatrix::identity(2, Backend::Rational);
        let i4 = DenseMatrix::identity(4, Backend::Rational);
        assert!(i2.kron(&i2).eq_exact(&i4));
    }

    #[test]
    fn partial_transpose_is_kron_factor_transpose() {
        let (a, b) = fixture_pair();
        let m = a.kron(&b);
        let pt_a = m.partial_transpose(3, 2, Subsystem::A).unwrap();
        let pt_b = m.partial_transpose(3, 2, Subsystem::B).unwrap();
        assert!(pt_a.eq_exact(&a.transpose().kron(&b)));
        assert!(pt_b.eq_exact(&a.kron(&b.transpose())));
        // A here is symmetric, so the A-side partial transpose is a fixpoint
        assert!(pt_a.eq_exact(&m));
    }

    #[test]
    fn partial_transpose_involution() {
        let (a, b) = fixture_pair();
        let m = a.kron(&b);
        for sub in [Subsystem::A, Subsystem::B] {
            let twice = m
                .partial_transpose(3, 2, sub)
                .unwrap()
                .partial_transpose(3, 2, sub)
                .unwrap();
            assert!(twice.eq_exact(&m));
        }
    }

    #[test]
    fn partial_transpose_dimension_error() {
        let m = DenseMatrix::identity(6, Backend::Rational);
        assert!(m.partial_transpose(4, 2, Subsystem::A).is_err());
    }

    #[test]
    fn partial_transpose_preserves_trace() {
        let (a, b) = fixture_pair();
        let m = a.kron(&b);
        let pt = m.partial_transpose(3, 2, Subsystem::A).unwrap();
        assert_eq!(m.trace_rational(), pt.trace_rational());
    }

    #[test]
    fn mixed_backend_promotes_to_float() {
        let r = DenseMatrix::identity(2, Backend::Rational);
        let f = DenseMatrix::identity(2, Backend::Float64);
        let sum = r.add(&f).unwrap();
        assert_eq!(sum.backend(), Backend::Float64);
        assert_eq!(sum.get_c64(0, 0), C64::new(2.0, 0.0));
    }

    #[test]
    fn entries_count_validated() {
        assert!(DenseMatrix::from_complex_vec(2, 2, vec![C64::new(1.0, 0.0); 3]).is_err());
    }
}
