//! Random instance generators for the property suites: Wishart-style
//! states, PPT states by rejection, CP and decomposable witnesses, and
//! small random rational tensors for exact roundtrip checks.

use crate::channel::{choi_of_map, map_of_choi, LinearMapTensor};
use crate::matrix::{DenseMatrix, Grid, Subsystem};
use crate::scalar::{rat, CRat, Rat, C64};
use crate::spectra;
use crate::state::BipartiteState;
use crate::witness::Witness;
use num::Zero;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian_complex_grid(rows: usize, cols: usize, rng: &mut impl Rng) -> Grid<C64> {
    let normal = StandardNormal;
    let data: Vec<C64> = (0..rows * cols)
        .map(|_| C64::new(normal.sample(rng), normal.sample(rng)))
        .collect();
    Grid::from_vec(rows, cols, data).expect("sizes agree")
}

/// Trace-one Wishart state `GG†/tr(GG†)`.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DenseMatrix {
    let g = DenseMatrix::F64(gaussian_complex_grid(dim, dim, rng));
    let w = g.matmul(&g.conj_transpose()).expect("square");
    let tr = w.trace().re;
    w.scale_f64(1.0 / tr)
}

/// Random PPT state: a Wishart state mixed toward the maximally mixed
/// state, with increasing mixing until the partial transpose is PSD.
pub fn random_ppt_state(dim_a: usize, dim_b: usize, rng: &mut impl Rng) -> BipartiteState {
    let d = dim_a * dim_b;
    let id = DenseMatrix::identity(d, crate::scalar::Backend::Float64).scale_f64(1.0 / d as f64);
    loop {
        let w = random_density(d, rng);
        for mix_steps in 0..8 {
            let mix = mix_steps as f64 / 7.0;
            let rho = w.scale_f64(1.0 - mix).add(&id.scale_f64(mix)).expect("same shape");
            let pt = rho.partial_transpose(dim_a, dim_b, Subsystem::A).expect("cut fits");
            if spectra::is_psd(&pt, 0.0).map(|c| c.min_eigenvalue > 1e-12).unwrap_or(false) {
                return BipartiteState::new(rho, dim_a, dim_b).expect("psd by construction");
            }
        }
    }
}

/// Random NPPT state: light mixing of a random pure state with noise,
/// rejected until the partial transpose has a clearly negative eigenvalue.
pub fn random_nppt_state(dim_a: usize, dim_b: usize, rng: &mut impl Rng) -> BipartiteState {
    let d = dim_a * dim_b;
    loop {
        let v = gaussian_complex_grid(d, 1, rng);
        let norm: f64 = v.data().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let proj: Vec<C64> = (0..d * d)
            .map(|at| v.data()[at / d] * v.data()[at % d].conj() / (norm * norm))
            .collect();
        let pure = DenseMatrix::from_complex_vec(d, d, proj).expect("square");
        let id = DenseMatrix::identity(d, crate::scalar::Backend::Float64);
        let rho = pure.scale_f64(0.9).add(&id.scale_f64(0.1 / d as f64)).expect("same shape");
        let pt = rho.partial_transpose(dim_a, dim_b, Subsystem::A).expect("cut fits");
        if let Ok(check) = spectra::is_psd(&pt, 0.0) {
            if check.min_eigenvalue < -1e-6 {
                return BipartiteState::new(rho, dim_a, dim_b).expect("psd by construction");
            }
        }
    }
}

/// Separable state built as an explicit convex mixture of product states.
pub fn random_separable_state(
    dim_a: usize,
    dim_b: usize,
    terms: usize,
    rng: &mut impl Rng,
) -> BipartiteState {
    let d = dim_a * dim_b;
    let mut acc = DenseMatrix::zeros(d, d, crate::scalar::Backend::Float64);
    for _ in 0..terms.max(1) {
        let a = random_density(dim_a, rng);
        let b = random_density(dim_b, rng);
        let p: f64 = rng.random_range(0.1..1.0);
        acc = acc.add(&a.kron(&b).scale_f64(p)).expect("same shape");
    }
    let tr = acc.trace().re;
    BipartiteState::new(acc.scale_f64(1.0 / tr), dim_a, dim_b).expect("psd by construction")
}

/// Random completely positive witness: a map whose Choi matrix is a random
/// PSD matrix.
pub fn random_cp_witness(dim_a: usize, dim_b: usize, rng: &mut impl Rng) -> Witness {
    let map = random_cp_map(dim_a, dim_b, rng);
    Witness::new(map, crate::witness::WitnessClass::CompletelyPositive, "random-cp")
        .expect("choi is psd by construction")
}

pub fn random_cp_map(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> LinearMapTensor {
    let d = in_dim * out_dim;
    let g = DenseMatrix::F64(gaussian_complex_grid(d, d, rng));
    let w = g.matmul(&g.conj_transpose()).expect("square");
    let tr = w.trace().re;
    map_of_choi(&w.scale_f64(1.0 / tr), in_dim, out_dim).expect("side matches")
}

/// Random decomposable witness `CP₁ + τ∘CP₂`, with the parts kept.
pub fn random_decomposable_witness(dim_a: usize, dim_b: usize, rng: &mut impl Rng) -> Witness {
    let cp = random_cp_map(dim_a, dim_b, rng);
    // a co-CP map is exactly a CP map followed by transposition, i.e. one
    // whose Choi partial transpose is PSD
    let cp2 = random_cp_map(dim_a, dim_b, rng);
    let ccp_choi = choi_of_map(&cp2)
        .matrix()
        .partial_transpose(dim_a, dim_b, Subsystem::A)
        .expect("cut fits");
    let ccp = map_of_choi(&ccp_choi, dim_a, dim_b).expect("side matches");
    Witness::decomposable(cp, ccp, "random-decomposable").expect("parts validated")
}

/// Random hermiticity-preserving map with Gaussian real coefficients on the
/// symmetric positions.
pub fn random_hermiticity_preserving_map(
    in_dim: usize,
    out_dim: usize,
    rng: &mut impl Rng,
) -> LinearMapTensor {
    let normal = StandardNormal;
    let d = in_dim * out_dim;
    // draw a random Hermitian Choi matrix, then read the map off it
    let mut data = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in i..d {
            let re: f64 = normal.sample(rng);
            let im: f64 = if i == j { 0.0 } else { normal.sample(rng) };
            data[i * d + j] = C64::new(re, im);
            data[j * d + i] = C64::new(re, -im);
        }
    }
    let h = DenseMatrix::from_complex_vec(d, d, data).expect("square");
    map_of_choi(&h, in_dim, out_dim).expect("side matches")
}

/// Random real PPT Choi matrix (PSD with PSD partial transpose), suitable
/// as a factor in real-tensor factorization tests.
pub fn random_real_ppt_choi(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> DenseMatrix {
    let d = in_dim * out_dim;
    let normal = StandardNormal;
    loop {
        let data: Vec<C64> = (0..d * d).map(|_| C64::new(normal.sample(rng), 0.0)).collect();
        let g = DenseMatrix::from_complex_vec(d, d, data).expect("square");
        let mut w = g.matmul(&g.conj_transpose()).expect("square");
        let tr = w.trace().re;
        w = w.scale_f64(1.0 / tr);
        let id = DenseMatrix::identity(d, crate::scalar::Backend::Float64);
        let rho = w.scale_f64(0.3).add(&id.scale_f64(0.7 / d as f64)).expect("same shape");
        let pt = rho.partial_transpose(in_dim, out_dim, Subsystem::A).expect("cut fits");
        if spectra::is_psd(&pt, 0.0).map(|c| c.min_eigenvalue > 1e-6).unwrap_or(false) {
            // scale back up so entries are O(1)
            return rho.scale_f64(d as f64);
        }
    }
}

/// Small random rationals with numerators in `[-9, 9]` and denominators in
/// `[1, 9]`; exact arithmetic stays cheap at these sizes.
pub fn random_rational(rng: &mut impl Rng) -> Rat {
    let num: i64 = rng.random_range(-9..=9);
    let den: i64 = rng.random_range(1..=9);
    rat(num, den)
}

pub fn random_rational_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    let data: Vec<CRat> = (0..rows * cols)
        .map(|_| CRat::new(random_rational(rng), Rat::zero()))
        .collect();
    DenseMatrix::from_rational_vec(rows, cols, data).expect("sizes agree")
}

pub fn random_rational_tensor(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> LinearMapTensor {
    let count = out_dim * out_dim * in_dim * in_dim;
    let entries: Vec<(i64, i64)> = (0..count)
        .map(|_| (rng.random_range(-9..=9), rng.random_range(1..=9)))
        .collect();
    LinearMapTensor::from_int_fractions(in_dim, out_dim, &entries).expect("sizes agree")
}

/// Random unit product vector `u ⊗ v`.
pub fn random_product_vector(dim_a: usize, dim_b: usize, rng: &mut impl Rng) -> Vec<C64> {
    let normal = StandardNormal;
    let unit = |dim: usize, rng: &mut dyn FnMut() -> f64| {
        let mut v: Vec<C64> = (0..dim).map(|_| C64::new(rng(), rng())).collect();
        let n: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|c| *c /= n);
        v
    };
    let mut draw = || normal.sample(rng);
    let u = unit(dim_a, &mut draw);
    let v = unit(dim_b, &mut draw);
    let mut out = Vec::with_capacity(dim_a * dim_b);
    for a in &u {
        for b in &v {
            out.push(a * b);
        }
    }
    out
}
