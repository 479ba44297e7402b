//! Numerical factorization of a target Choi matrix through an intermediate
//! dimension: find maps `φ₁: M_a → M_b` and `φ₂: M_b → M_c` whose
//! composition has the target as Choi matrix, optionally forcing both
//! factors to be identical (channel square roots) and/or PPT.
//!
//! The objective is the squared Frobenius distance of the composed Choi
//! matrix to the target, a polynomial of degree four in the real tensor
//! coefficients, plus eigenvalue penalties for the requested positivity
//! constraints. Each restart runs a damped least-squares (Levenberg style)
//! iteration on the stacked residual; the first restart is a structured
//! initialization (principal square root of the transfer matrix in square
//! mode, truncated SVD factorization otherwise) and the remaining restarts
//! are random. Restarts are independent and run concurrently; results are
//! canonicalized, deduplicated and sorted, so the output is a pure function
//! of the problem and the configuration.

use crate::channel::{choi_of_map, ChoiMatrix, LinearMapTensor};
use crate::error::{Error, Result};
use crate::spectra;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Mutex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorizationMode {
    /// Force `a = b = c` and `φ₁ = φ₂`.
    SquareRoot,
    /// Two independent factors through the middle dimension.
    GeneralPair,
}

/// Positivity constraints applied to one factor through penalties.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct ConstraintFlags {
    pub require_cp: bool,
    pub require_ccp: bool,
}

impl ConstraintFlags {
    pub fn ppt() -> Self {
        ConstraintFlags { require_cp: true, require_ccp: true }
    }

    pub fn none() -> Self {
        ConstraintFlags::default()
    }

    fn any(&self) -> bool {
        self.require_cp || self.require_ccp
    }
}

#[derive(Clone, Debug)]
pub struct FactorizationProblem {
    pub target: ChoiMatrix,
    /// `(a, b, c)`: input, intermediate and output dimensions.
    pub dims: (usize, usize, usize),
    pub mode: FactorizationMode,
    pub factor1_constraints: ConstraintFlags,
    pub factor2_constraints: ConstraintFlags,
}

impl FactorizationProblem {
    pub fn new(target: ChoiMatrix, dims: (usize, usize, usize), mode: FactorizationMode) -> Result<Self> {
        let (a, b, c) = dims;
        if a == 0 || b == 0 || c == 0 {
            return Err(Error::InvalidArgument("zero dimension in factorization".into()));
        }
        if mode == FactorizationMode::SquareRoot && !(a == b && b == c) {
            return Err(Error::InvalidArgument(format!(
                "square-root mode needs a = b = c, got ({a}, {b}, {c})"
            )));
        }
        if target.side() != a * c {
            return Err(Error::DimensionMismatch(format!(
                "target side {} vs a·c = {}",
                target.side(),
                a * c
            )));
        }
        Ok(FactorizationProblem {
            target,
            dims,
            mode,
            factor1_constraints: ConstraintFlags::ppt(),
            factor2_constraints: ConstraintFlags::ppt(),
        })
    }

    pub fn with_constraints(mut self, factor1: ConstraintFlags, factor2: ConstraintFlags) -> Self {
        self.factor1_constraints = factor1;
        self.factor2_constraints = factor2;
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Standard deviation of the random initial coefficients.
    pub init_scale: f64,
    /// Initial damping of the least-squares step.
    pub damping_init: f64,
    /// Accept a solution when the Frobenius distance of its composed Choi
    /// matrix to the target is at most this.
    pub residual_tol: f64,
    pub psd_penalty_weight: f64,
    /// Factor applied to the penalty weight whenever the residual stalls
    /// while violations persist.
    pub penalty_escalation: f64,
    pub max_escalations: usize,
    /// Constraint eigenvalues above `-psd_tol` count as satisfied.
    pub psd_tol: f64,
    /// Solutions closer than this after canonicalization are duplicates.
    pub distinct_tol: f64,
    pub seed: u64,
    /// Optional line-delimited JSON progress log.
    pub log_file: Option<std::path::PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: 64,
            max_iters: 2000,
            init_scale: 0.7,
            damping_init: 1e-3,
            residual_tol: 1e-8,
            psd_penalty_weight: 1.0,
            penalty_escalation: 10.0,
            max_escalations: 5,
            psd_tol: 1e-8,
            distinct_tol: 1e-6,
            seed: 0,
            log_file: None,
        }
    }
}

/// Minimum eigenvalues of each factor's Choi matrix and partial transpose,
/// recorded whether or not the corresponding constraint was requested.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConstraintViolations {
    pub min_eig_choi_factor1: f64,
    pub min_eig_pt_factor1: f64,
    pub min_eig_choi_factor2: f64,
    pub min_eig_pt_factor2: f64,
}

impl ConstraintViolations {
    /// Worst constrained eigenvalue (0 when nothing is constrained).
    fn worst(&self, f1: ConstraintFlags, f2: ConstraintFlags) -> f64 {
        let mut worst = 0.0f64;
        if f1.require_cp {
            worst = worst.min(self.min_eig_choi_factor1);
        }
        if f1.require_ccp {
            worst = worst.min(self.min_eig_pt_factor1);
        }
        if f2.require_cp {
            worst = worst.min(self.min_eig_choi_factor2);
        }
        if f2.require_ccp {
            worst = worst.min(self.min_eig_pt_factor2);
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct FactorizationSolution {
    pub factor1: LinearMapTensor,
    pub factor2: LinearMapTensor,
    /// Frobenius distance of the composed Choi matrix to the target.
    pub residual: f64,
    pub constraint_violations: ConstraintViolations,
    pub accepted: bool,
}

/// Value and exact gradient of the composition objective
/// `‖choi(compose(factor2, factor1)) − target‖²_F` with respect to the real
/// coefficients of both factors.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub value: f64,
    pub grad_factor1: Vec<f64>,
    pub grad_factor2: Vec<f64>,
}

pub fn composition_residual(
    factor1: &LinearMapTensor,
    factor2: &LinearMapTensor,
    target: &ChoiMatrix,
) -> Result<ResidualReport> {
    let (a, b) = (factor1.in_dim(), factor1.out_dim());
    let c = factor2.out_dim();
    if factor2.in_dim() != b || target.side() != a * c {
        return Err(Error::DimensionMismatch(format!(
            "dimension chain {a}→{b}→{} against target side {}",
            factor2.out_dim(),
            target.side()
        )));
    }
    let work = RealWork::from_parts(target, (a, b, c), false, Default::default(), Default::default())?;
    let mut x = DVector::zeros(work.nvar);
    write_tensor(factor1, &mut x.as_mut_slice()[..work.n1])?;
    write_tensor(factor2, &mut x.as_mut_slice()[work.n1..])?;
    let r = work.residual(&x);
    let j = work.jacobian(&x);
    let grad = 2.0 * j.transpose() * &r;
    Ok(ResidualReport {
        value: r.dot(&r),
        grad_factor1: grad.as_slice()[..work.n1].to_vec(),
        grad_factor2: grad.as_slice()[work.n1..].to_vec(),
    })
}

fn write_tensor(map: &LinearMapTensor, out: &mut [f64]) -> Result<()> {
    let t = map.as_f64_tensor();
    for (dst, src) in out.iter_mut().zip(t.coeffs().iter()) {
        if src.im.abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "the factorization solver works on real coefficient tensors".into(),
            ));
        }
        *dst = src.re;
    }
    Ok(())
}

/// Multi-start penalized least-squares search. Returns all distinct
/// accepted solutions sorted by residual; an empty list means nothing was
/// found within budget, not that no factorization exists.
pub fn solve_factorization(
    problem: &FactorizationProblem,
    config: &SolverConfig,
) -> Result<Vec<FactorizationSolution>> {
    if config.residual_tol <= 0.0 {
        return Err(Error::InvalidArgument("residual_tol must be positive".into()));
    }
    let square = problem.mode == FactorizationMode::SquareRoot;
    let work = RealWork::from_parts(
        &problem.target,
        problem.dims,
        square,
        problem.factor1_constraints,
        problem.factor2_constraints,
    )?;
    let log = match &config.log_file {
        Some(path) => Some(Mutex::new(std::fs::File::create(path)?)),
        None => None,
    };

    let restarts = config.restarts.max(1);
    let candidates: Vec<Option<DVector<f64>>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let x0 = if r == 0 {
                work.structured_init().unwrap_or_else(|| work.random_init(config, r))
            } else {
                work.random_init(config, r)
            };
            let x = run_restart(&work, config, x0, r, log.as_ref());
            Some(x)
        })
        .collect();

    let mut accepted: Vec<(DVector<f64>, FactorizationSolution)> = Vec::new();
    for x in candidates.into_iter().flatten() {
        let x = work.canonicalize(&x);
        let solution = work.solution_from(&x, config);
        if !solution.accepted {
            continue;
        }
        let duplicate = accepted
            .iter()
            .any(|(y, _)| (&x - y).norm() <= config.distinct_tol);
        if !duplicate {
            accepted.push((x, solution));
        }
    }
    let mut out: Vec<(DVector<f64>, FactorizationSolution)> = accepted;
    out.sort_by(|(xa, a), (xb, b)| {
        a.residual
            .partial_cmp(&b.residual)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                xa.as_slice()
                    .iter()
                    .zip(xb.as_slice())
                    .find_map(|(u, v)| u.partial_cmp(v).filter(|o| o.is_ne()))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    Ok(out.into_iter().map(|(_, s)| s).collect())
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub is_positive_factor1: bool,
    pub is_positive_factor2: bool,
    pub is_ppt_factor1: bool,
    pub is_ppt_factor2: bool,
    pub residual: f64,
    pub residual_ok: bool,
}

/// Re-derive every claim about a solution from the tensors alone: factor
/// positivity and PPT-ness from fresh Choi spectra, the residual from a
/// fresh composition.
pub fn verify_solution(
    solution: &FactorizationSolution,
    target: &ChoiMatrix,
    tol: f64,
) -> Result<VerificationReport> {
    let check = |map: &LinearMapTensor| -> Result<(bool, bool)> {
        let choi = choi_of_map(map);
        let c = spectra::is_psd(choi.matrix(), tol)?;
        let p = spectra::is_psd(&choi.partial_transpose(), tol)?;
        Ok((c.is_psd, c.is_psd && p.is_psd))
    };
    let (pos1, ppt1) = check(&solution.factor1)?;
    let (pos2, ppt2) = check(&solution.factor2)?;
    let composed = crate::channel::compose(&solution.factor2, &solution.factor1)?;
    let residual = choi_of_map(&composed)
        .matrix()
        .frobenius_distance(target.matrix());
    Ok(VerificationReport {
        is_positive_factor1: pos1,
        is_positive_factor2: pos2,
        is_ppt_factor1: ppt1,
        is_ppt_factor2: ppt2,
        residual,
        residual_ok: residual <= tol.max(1e-8),
    })
}

// ---------------------------------------------------------------------------
// internal real-coefficient formulation

struct RealWork {
    a: usize,
    b: usize,
    c: usize,
    square: bool,
    target: DMatrix<f64>,
    f1c: ConstraintFlags,
    f2c: ConstraintFlags,
    /// Variable count for factor 1; factor 2 occupies the rest in pair mode.
    n1: usize,
    nvar: usize,
}

impl RealWork {
    fn from_parts(
        target: &ChoiMatrix,
        dims: (usize, usize, usize),
        square: bool,
        f1c: ConstraintFlags,
        f2c: ConstraintFlags,
    ) -> Result<Self> {
        let (a, b, c) = dims;
        let side = a * c;
        if target.side() != side {
            return Err(Error::DimensionMismatch(format!(
                "target side {} vs a·c = {side}",
                target.side()
            )));
        }
        let mut t = DMatrix::zeros(side, side);
        for i in 0..side {
            for j in 0..side {
                let v = target.matrix().get_c64(i, j);
                if v.im.abs() > 1e-12 {
                    return Err(Error::InvalidArgument(
                        "the factorization solver works on real targets".into(),
                    ));
                }
                t[(i, j)] = v.re;
            }
        }
        let n1 = b * b * a * a;
        let n2 = if square { 0 } else { c * c * b * b };
        Ok(RealWork { a, b, c, square, target: t, f1c, f2c, n1, nvar: n1 + n2 })
    }

    #[inline]
    fn idx1(&self, k: usize, l: usize, i: usize, j: usize) -> usize {
        ((k * self.b + l) * self.a + i) * self.a + j
    }

    #[inline]
    fn idx2(&self, p: usize, q: usize, k: usize, l: usize) -> usize {
        if self.square {
            self.idx1(p, q, k, l)
        } else {
            self.n1 + ((p * self.c + q) * self.b + k) * self.b + l
        }
    }

    fn f1<'x>(&self, x: &'x DVector<f64>) -> &'x [f64] {
        &x.as_slice()[..self.n1]
    }

    fn f2<'x>(&self, x: &'x DVector<f64>) -> &'x [f64] {
        if self.square {
            &x.as_slice()[..self.n1]
        } else {
            &x.as_slice()[self.n1..]
        }
    }

    /// Composite Choi matrix entries: `C[(i,k),(j,l)] = Σ_{s,t} f2[k,l,s,t]·f1[s,t,i,j]`.
    fn composite_choi(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (a, b, c) = (self.a, self.b, self.c);
        let f1 = self.f1(x);
        let f2 = self.f2(x);
        let mut out = DMatrix::zeros(a * c, a * c);
        for k in 0..c {
            for l in 0..c {
                for s in 0..b {
                    for t in 0..b {
                        let w = f2[self.idx2_local(k, l, s, t)];
                        if w == 0.0 {
                            continue;
                        }
                        for i in 0..a {
                            for j in 0..a {
                                out[(i * c + k, j * c + l)] += w * f1[self.idx1(s, t, i, j)];
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Index of `f2[p,q,k,l]` within the factor-2 slice.
    #[inline]
    fn idx2_local(&self, p: usize, q: usize, k: usize, l: usize) -> usize {
        if self.square {
            self.idx1(p, q, k, l)
        } else {
            ((p * self.c + q) * self.b + k) * self.b + l
        }
    }

    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let c = self.composite_choi(x) - &self.target;
        DVector::from_column_slice(c.transpose().as_slice())
    }

    /// Jacobian of the residual vector (row-major residual ordering).
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (a, b, c) = (self.a, self.b, self.c);
        let side = a * c;
        let f1 = self.f1(x).to_vec();
        let f2 = self.f2(x).to_vec();
        let mut jac = DMatrix::zeros(side * side, self.nvar);
        for i in 0..a {
            for k in 0..c {
                for j in 0..a {
                    for l in 0..c {
                        let row = (i * c + k) * side + (j * c + l);
                        for s in 0..b {
                            for t in 0..b {
                                // ∂/∂ f1[s,t,i,j]
                                let col1 = self.idx1(s, t, i, j);
                                jac[(row, col1)] += f2[self.idx2_local(k, l, s, t)];
                                // ∂/∂ f2[k,l,s,t]
                                let col2 = self.idx2(k, l, s, t);
                                jac[(row, col2)] += f1[self.idx1(s, t, i, j)];
                            }
                        }
                    }
                }
            }
        }
        jac
    }

    /// Hermiticity-tying rows for constrained factors: for real tensors the
    /// hermiticity-preserving condition is `c[k,l,i,j] = c[l,k,j,i]`.
    fn symmetry_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        if self.f1c.any() {
            for k in 0..self.b {
                for l in 0..self.b {
                    for i in 0..self.a {
                        for j in 0..self.a {
                            let p = self.idx1(k, l, i, j);
                            let q = self.idx1(l, k, j, i);
                            if p < q {
                                pairs.push((p, q));
                            }
                        }
                    }
                }
            }
        }
        if !self.square && self.f2c.any() {
            for p_ in 0..self.c {
                for q_ in 0..self.c {
                    for k in 0..self.b {
                        for l in 0..self.b {
                            let p = self.idx2(p_, q_, k, l);
                            let q = self.idx2(q_, p_, l, k);
                            if p < q {
                                pairs.push((p, q));
                            }
                        }
                    }
                }
            }
        }
        pairs
    }

    /// Negative-eigenvalue penalty residuals and their exact gradient rows.
    /// Spectra are taken on the symmetrized Choi matrices; the symmetry
    /// rows keep the asymmetric part pinned to zero.
    fn penalties(&self, x: &DVector<f64>, weight: f64) -> (Vec<f64>, Vec<Vec<(usize, f64)>>) {
        let mut values = Vec::new();
        let mut rows = Vec::new();
        let w = weight.sqrt();
        let f2c = if self.square { self.f1c } else { self.f2c };
        type VarIndex<'s> = Box<dyn Fn(usize, usize, usize, usize) -> usize + 's>;
        let mut factors: Vec<(usize, usize, ConstraintFlags, VarIndex<'_>)> = vec![(
            self.a,
            self.b,
            self.f1c,
            Box::new(|k, l, i, j| ((k * self.b + l) * self.a + i) * self.a + j),
        )];
        if !self.square {
            factors.push((
                self.b,
                self.c,
                f2c,
                Box::new(|k, l, i, j| self.n1 + ((k * self.c + l) * self.b + i) * self.b + j),
            ));
        }
        for (din, dout, flags, index) in &factors {
            if !flags.any() {
                continue;
            }
            let (din, dout) = (*din, *dout);
            let side = din * dout;
            let mut choi = DMatrix::zeros(side, side);
            for k in 0..dout {
                for l in 0..dout {
                    for i in 0..din {
                        for j in 0..din {
                            choi[(i * dout + k, j * dout + l)] = x[index(k, l, i, j)];
                        }
                    }
                }
            }
            for (is_pt, wanted) in [(false, flags.require_cp), (true, flags.require_ccp)] {
                if !wanted {
                    continue;
                }
                let m = if is_pt { pt_input(&choi, din, dout) } else { choi.clone() };
                let sym = (&m + m.transpose()).scale(0.5);
                let eig = SymmetricEigen::new(sym);
                for q in 0..side {
                    let lam = eig.eigenvalues[q];
                    if lam < 0.0 {
                        values.push(w * lam);
                        let v = eig.eigenvectors.column(q);
                        let mut row = Vec::new();
                        for k in 0..dout {
                            for l in 0..dout {
                                for i in 0..din {
                                    for j in 0..din {
                                        let g = if is_pt {
                                            v[j * dout + k] * v[i * dout + l]
                                        } else {
                                            v[i * dout + k] * v[j * dout + l]
                                        };
                                        if g != 0.0 {
                                            row.push((index(k, l, i, j), w * g));
                                        }
                                    }
                                }
                            }
                        }
                        rows.push(row);
                    }
                }
            }
        }
        (values, rows)
    }

    /// Stacked residual and Jacobian: composition rows, symmetry rows,
    /// penalty rows.
    fn system(&self, x: &DVector<f64>, weight: f64) -> (DVector<f64>, DMatrix<f64>) {
        let r = self.residual(x);
        let jac = self.jacobian(x);
        let pairs = self.symmetry_pairs();
        let (pv, pr) = self.penalties(x, weight);
        let total = r.len() + pairs.len() + pv.len();
        let mut rr = DVector::zeros(total);
        let mut jj = DMatrix::zeros(total, self.nvar);
        rr.rows_mut(0, r.len()).copy_from(&r);
        jj.rows_mut(0, r.len()).copy_from(&jac);
        let mut at = r.len();
        for &(p, q) in &pairs {
            rr[at] = x[p] - x[q];
            jj[(at, p)] = 1.0;
            jj[(at, q)] = -1.0;
            at += 1;
        }
        for (v, row) in pv.iter().zip(pr.iter()) {
            rr[at] = *v;
            for &(col, g) in row {
                jj[(at, col)] += g;
            }
            at += 1;
        }
        (rr, jj)
    }

    fn random_init(&self, config: &SolverConfig, restart: usize) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(restart as u64 + 1);
        let normal = StandardNormal;
        DVector::from_fn(self.nvar, |_, _| {
            let v: f64 = normal.sample(&mut rng);
            v * config.init_scale
        })
    }

    /// Deterministic warm start. In square mode the target's transfer
    /// matrix (the tensor flattened to `m²×n²`) is multiplicative under
    /// composition, so its principal square root is a square root of the
    /// channel whenever it exists and is real. In pair mode a truncated SVD
    /// of the transfer matrix gives a rank-`b²` factorization.
    fn structured_init(&self) -> Option<DVector<f64>> {
        let transfer = self.target_transfer();
        if self.square {
            let root = principal_sqrt(&transfer)?;
            let mut x = DVector::zeros(self.nvar);
            for k in 0..self.b {
                for l in 0..self.b {
                    for i in 0..self.a {
                        for j in 0..self.a {
                            x[self.idx1(k, l, i, j)] = root[(k * self.b + l, i * self.a + j)];
                        }
                    }
                }
            }
            Some(x)
        } else {
            let rank = (self.b * self.b).min(transfer.nrows()).min(transfer.ncols());
            let svd = transfer.svd(true, true);
            let u = svd.u?;
            let vt = svd.v_t?;
            let mut x = DVector::zeros(self.nvar);
            for r in 0..rank {
                let s = svd.singular_values[r].max(0.0).sqrt();
                let (k, l) = (r / self.b, r % self.b);
                for p in 0..self.c {
                    for q in 0..self.c {
                        x[self.idx2(p, q, k, l)] = u[(p * self.c + q, r)] * s;
                    }
                }
                for i in 0..self.a {
                    for j in 0..self.a {
                        x[self.idx1(k, l, i, j)] = s * vt[(r, i * self.a + j)];
                    }
                }
            }
            Some(x)
        }
    }

    /// Transfer matrix of the target: rows `(k,l)` over the output algebra,
    /// columns `(i,j)` over the input algebra.
    fn target_transfer(&self) -> DMatrix<f64> {
        let (a, c) = (self.a, self.c);
        let mut l = DMatrix::zeros(c * c, a * a);
        for k in 0..c {
            for q in 0..c {
                for i in 0..a {
                    for j in 0..a {
                        l[(k * c + q, i * a + j)] = self.target[(i * c + k, j * c + q)];
                    }
                }
            }
        }
        l
    }

    /// Fix the gauge: in square mode flip the overall sign so the
    /// largest-magnitude coefficient is positive; in pair mode balance the
    /// factor norms (the composite is invariant under `(sφ₁, φ₂/s)`), then
    /// fix the sign pair the same way.
    fn canonicalize(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut x = x.clone();
        if !self.square {
            let n1: f64 = self.f1(&x).iter().map(|v| v * v).sum::<f64>().sqrt();
            let n2: f64 = self.f2(&x).iter().map(|v| v * v).sum::<f64>().sqrt();
            if n1 > 1e-12 && n2 > 1e-12 {
                let s = (n2 / n1).sqrt();
                for v in &mut x.as_mut_slice()[..self.n1] {
                    *v *= s;
                }
                let inv = 1.0 / s;
                for v in &mut x.as_mut_slice()[self.n1..] {
                    *v *= inv;
                }
            }
        }
        let lead = self
            .f1(&x)
            .iter()
            .cloned()
            .max_by(|u, v| u.abs().partial_cmp(&v.abs()).unwrap())
            .unwrap_or(0.0);
        if lead < 0.0 {
            for v in &mut x.as_mut_slice()[..self.n1] {
                *v = -*v;
            }
            if !self.square {
                for v in &mut x.as_mut_slice()[self.n1..] {
                    *v = -*v;
                }
            }
        }
        x
    }

    fn tensors_from(&self, x: &DVector<f64>) -> (LinearMapTensor, LinearMapTensor) {
        let f1 = LinearMapTensor::from_real_coeffs(self.a, self.b, self.f1(x))
            .expect("coefficient count fixed by dims");
        let f2 = LinearMapTensor::from_real_coeffs(self.b, self.c, self.f2(x))
            .expect("coefficient count fixed by dims");
        (f1, f2)
    }

    fn solution_from(&self, x: &DVector<f64>, config: &SolverConfig) -> FactorizationSolution {
        let (f1, f2) = self.tensors_from(x);
        let residual = self.residual(x).norm();
        let eig_pair = |map: &LinearMapTensor| -> (f64, f64) {
            let choi = choi_of_map(map);
            let sym_min = |m: &crate::matrix::DenseMatrix| {
                let f = m.to_f64();
                let herm = f.add(&f.conj_transpose()).expect("square").scale_f64(0.5);
                spectra::hermitian_eigenvalues(&herm)
                    .map(|v| v.first().copied().unwrap_or(f64::INFINITY))
                    .unwrap_or(f64::NEG_INFINITY)
            };
            (sym_min(choi.matrix()), sym_min(&choi.partial_transpose()))
        };
        let (c1, p1) = eig_pair(&f1);
        let (c2, p2) = eig_pair(&f2);
        let violations = ConstraintViolations {
            min_eig_choi_factor1: c1,
            min_eig_pt_factor1: p1,
            min_eig_choi_factor2: c2,
            min_eig_pt_factor2: p2,
        };
        let f2c = if self.square { self.f1c } else { self.f2c };
        let worst = violations.worst(self.f1c, f2c);
        let accepted = residual <= config.residual_tol && worst >= -config.psd_tol;
        FactorizationSolution {
            factor1: f1,
            factor2: f2,
            residual,
            constraint_violations: violations,
            accepted,
        }
    }
}

fn pt_input(choi: &DMatrix<f64>, din: usize, dout: usize) -> DMatrix<f64> {
    let side = din * dout;
    let mut out = DMatrix::zeros(side, side);
    for i in 0..din {
        for j in 0..din {
            for k in 0..dout {
                for l in 0..dout {
                    out[(j * dout + k, i * dout + l)] = choi[(i * dout + k, j * dout + l)];
                }
            }
        }
    }
    out
}

/// Principal matrix square root by the Denman–Beavers iteration. Returns
/// `None` when an iterate is singular or the result does not square back to
/// the input (eigenvalues on the closed negative real axis).
fn principal_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    let mut y = m.clone();
    let mut z = DMatrix::identity(n, n);
    for _ in 0..80 {
        let y_inv = y.clone().try_inverse()?;
        let z_inv = z.clone().try_inverse()?;
        let y_next = (&y + z_inv).scale(0.5);
        let z_next = (&z + y_inv).scale(0.5);
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta < 1e-15 * (1.0 + y.norm()) {
            break;
        }
    }
    let err = (&y * &y - m).norm();
    if err.is_finite() && err <= 1e-8 * (1.0 + m.norm()) {
        Some(y)
    } else {
        None
    }
}

fn run_restart(
    work: &RealWork,
    config: &SolverConfig,
    x0: DVector<f64>,
    restart: usize,
    log: Option<&Mutex<std::fs::File>>,
) -> DVector<f64> {
    let mut x = x0;
    let mut weight = config.psd_penalty_weight;
    let mut iters_left = config.max_iters;
    for escalation in 0..=config.max_escalations {
        let used = lm_minimize(work, config, &mut x, weight, iters_left, restart, log);
        iters_left = iters_left.saturating_sub(used).max(50);
        let (pv, _) = work.penalties(&x, 1.0);
        let worst = pv.iter().fold(0.0f64, |acc, v| acc.min(*v));
        if worst >= -config.psd_tol {
            break;
        }
        if escalation < config.max_escalations {
            weight *= config.penalty_escalation;
        }
    }
    x
}

/// Damped least-squares on the stacked system. Returns iterations used.
fn lm_minimize(
    work: &RealWork,
    config: &SolverConfig,
    x: &mut DVector<f64>,
    weight: f64,
    max_iters: usize,
    restart: usize,
    log: Option<&Mutex<std::fs::File>>,
) -> usize {
    let mut mu = config.damping_init;
    let (mut r, mut j) = work.system(x, weight);
    let mut f = r.dot(&r);
    let mut used = 0;
    while used < max_iters {
        used += 1;
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * &r;
        let mut improved = false;
        for _ in 0..30 {
            let damped = &a + DMatrix::identity(work.nvar, work.nvar).scale(mu);
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    mu *= 10.0;
                    continue;
                }
            };
            let xn = &*x + &step;
            let (rn, jn) = work.system(&xn, weight);
            let fn_ = rn.dot(&rn);
            if fn_ < f {
                *x = xn;
                r = rn;
                j = jn;
                f = fn_;
                mu = (mu / 3.0).max(1e-14);
                improved = true;
                break;
            }
            mu *= 4.0;
            if mu > 1e14 {
                break;
            }
        }
        if let Some(sink) = log {
            if used % 100 == 0 || !improved || f < 1e-26 {
                let (pv, _) = work.penalties(x, 1.0);
                let worst = pv.iter().fold(0.0f64, |acc, v| acc.min(*v));
                let line = serde_json::json!({
                    "restart": restart,
                    "iteration": used,
                    "residual": work.residual(x).norm(),
                    "max_violation": -worst,
                });
                if let Ok(mut file) = sink.lock() {
                    let _ = writeln!(file, "{line}");
                }
            }
        }
        if !improved || f < 1e-26 {
            break;
        }
    }
    used
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::scalar::Backend;

    fn eta_target() -> ChoiMatrix {
        let entries: Vec<(i64, i64)> = vec![
            (17, 4), (0, 1), (0, 1), (1, 9),
            (0, 1), (2, 1), (0, 1), (0, 1),
            (0, 1), (0, 1), (2, 1), (0, 1),
            (1, 9), (0, 1), (0, 1), (17, 4),
        ];
        let m = DenseMatrix::from_int_fractions(4, 4, &entries).unwrap();
        ChoiMatrix::new(m, 2, 2).unwrap()
    }

    /// The closed-form square root of the tridiagonal-free target: diagonal
    /// action (2, 1/2 | 1/2, 2) with 1/3 on the matched off-diagonal cells.
    fn eta_root() -> LinearMapTensor {
        let mut entries = vec![(0i64, 1i64); 16];
        entries[0] = (2, 1); // c[0,0,0,0]
        entries[3] = (1, 2); // c[0,0,1,1]
        entries[5] = (1, 3); // c[0,1,0,1]
        entries[10] = (1, 3); // c[1,0,1,0]
        entries[12] = (1, 2); // c[1,1,0,0]
        entries[15] = (2, 1); // c[1,1,1,1]
        LinearMapTensor::from_int_fractions(2, 2, &entries).unwrap()
    }

    #[test]
    fn known_root_has_zero_residual() {
        let root = eta_root();
        let report = composition_residual(&root, &root, &eta_target()).unwrap();
        assert!(report.value < 1e-24, "value {}", report.value);
    }

    #[test]
    fn zero_factors_residual_is_target_norm() {
        let zero = LinearMapTensor::zeros(2, 2, Backend::Float64);
        let target = eta_target();
        let report = composition_residual(&zero, &zero, &target).unwrap();
        let expected = target.matrix().frobenius_norm().powi(2);
        assert!((report.value - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (a, b, c) in [(2, 2, 2), (4, 2, 4)] {
            let target_map = crate::sampling::random_cp_map(a, c, &mut rng);
            let target = choi_of_map(&LinearMapTensor::from_real_coeffs(
                a,
                c,
                &target_map
                    .as_f64_tensor()
                    .coeffs()
                    .iter()
                    .map(|v| v.re)
                    .collect::<Vec<_>>(),
            )
            .unwrap());
            let normal = StandardNormal;
            let mk = |in_d: usize, out_d: usize, rng: &mut ChaCha8Rng| {
                let n = out_d * out_d * in_d * in_d;
                let coeffs: Vec<f64> = (0..n).map(|_| normal.sample(rng)).collect();
                LinearMapTensor::from_real_coeffs(in_d, out_d, &coeffs).unwrap()
            };
            let f1 = mk(a, b, &mut rng);
            let f2 = mk(b, c, &mut rng);
            let report = composition_residual(&f1, &f2, &target).unwrap();
            let h = 1e-5;
            // probe a handful of coordinates in each factor
            for probe in 0..6 {
                let at = probe * 2 % report.grad_factor1.len();
                let mut plus = f1.as_f64_tensor().coeffs().iter().map(|v| v.re).collect::<Vec<_>>();
                let mut minus = plus.clone();
                plus[at] += h;
                minus[at] -= h;
                let fp = composition_residual(
                    &LinearMapTensor::from_real_coeffs(a, b, &plus).unwrap(),
                    &f2,
                    &target,
                )
                .unwrap()
                .value;
                let fm = composition_residual(
                    &LinearMapTensor::from_real_coeffs(a, b, &minus).unwrap(),
                    &f2,
                    &target,
                )
                .unwrap()
                .value;
                let fd = (fp - fm) / (2.0 * h);
                let an = report.grad_factor1[at];
                let scale = an.abs().max(fd.abs()).max(1e-6);
                assert!((fd - an).abs() / scale < 1e-5, "factor1[{at}]: fd {fd} vs {an}");
            }
        }
    }

    #[test]
    fn square_root_recovers_closed_form() {
        let problem = FactorizationProblem::new(eta_target(), (2, 2, 2), FactorizationMode::SquareRoot)
            .unwrap()
            .with_constraints(ConstraintFlags::ppt(), ConstraintFlags::ppt());
        let config = SolverConfig { restarts: 4, ..SolverConfig::default() };
        let solutions = solve_factorization(&problem, &config).unwrap();
        assert!(!solutions.is_empty());
        let expected = eta_root();
        let hit = solutions
            .iter()
            .any(|s| s.factor1.approx_eq(&expected, 1e-8) && s.residual < 1e-10);
        assert!(hit, "closed-form root not among {} solutions", solutions.len());
        let report = verify_solution(&solutions[0], &eta_target(), 1e-8).unwrap();
        assert!(report.residual_ok);
        assert!(report.is_ppt_factor1 && report.is_ppt_factor2);
    }

    #[test]
    fn identity_square_root_is_identity() {
        let target = choi_of_map(&LinearMapTensor::identity(2, Backend::Rational));
        let problem = FactorizationProblem::new(target.clone(), (2, 2, 2), FactorizationMode::SquareRoot)
            .unwrap()
            .with_constraints(ConstraintFlags { require_cp: true, require_ccp: false }, ConstraintFlags::none());
        let config = SolverConfig { restarts: 2, ..SolverConfig::default() };
        let solutions = solve_factorization(&problem, &config).unwrap();
        let id = LinearMapTensor::identity(2, Backend::Float64);
        assert!(solutions.iter().any(|s| s.factor1.approx_eq(&id, 1e-8) && s.residual < 1e-10));
    }

    #[test]
    fn solver_is_deterministic() {
        let problem = FactorizationProblem::new(eta_target(), (2, 2, 2), FactorizationMode::SquareRoot)
            .unwrap();
        let config = SolverConfig { restarts: 6, ..SolverConfig::default() };
        let a = solve_factorization(&problem, &config).unwrap();
        let b = solve_factorization(&problem, &config).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.residual, y.residual);
            assert!(x.factor1.approx_eq(&y.factor1, 0.0));
        }
    }

    #[test]
    fn planted_violation_fails_verification() {
        // a factor whose Choi has a -0.1 eigenvalue is not PPT
        let mut entries = vec![0.0; 16];
        entries[0] = -0.1; // c[0,0,0,0] -> Choi (0,0) entry
        entries[15] = 1.0;
        let bad = LinearMapTensor::from_real_coeffs(2, 2, &entries).unwrap();
        let solution = FactorizationSolution {
            factor1: bad.clone(),
            factor2: bad.clone(),
            residual: f64::NAN,
            constraint_violations: ConstraintViolations {
                min_eig_choi_factor1: 0.0,
                min_eig_pt_factor1: 0.0,
                min_eig_choi_factor2: 0.0,
                min_eig_pt_factor2: 0.0,
            },
            accepted: true,
        };
        let report = verify_solution(&solution, &eta_target(), 1e-9).unwrap();
        assert!(!report.is_ppt_factor1);
        assert!(!report.is_positive_factor1);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(FactorizationProblem::new(eta_target(), (2, 3, 2), FactorizationMode::SquareRoot).is_err());
        assert!(FactorizationProblem::new(eta_target(), (4, 2, 4), FactorizationMode::GeneralPair).is_err());
    }

    #[test]
    fn rejects_nonpositive_residual_tol() {
        let problem =
            FactorizationProblem::new(eta_target(), (2, 2, 2), FactorizationMode::SquareRoot)
                .unwrap();
        let config = SolverConfig { residual_tol: 0.0, ..SolverConfig::default() };
        assert!(solve_factorization(&problem, &config).is_err());
    }

    #[test]
    fn progress_log_is_line_delimited_json() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("progress.ndjson");
        let problem =
            FactorizationProblem::new(eta_target(), (2, 2, 2), FactorizationMode::SquareRoot)
                .unwrap();
        let config = SolverConfig {
            restarts: 2,
            log_file: Some(log.clone()),
            ..SolverConfig::default()
        };
        solve_factorization(&problem, &config).unwrap();
        let text = std::fs::read_to_string(&log).unwrap();
        assert!(!text.is_empty());
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["iteration"].is_u64());
            assert!(v["residual"].is_f64());
            assert!(v["max_violation"].is_f64());
        }
    }
}
