//! Entanglement diagnostics: PPT tests, witness pairing, Schmidt rank,
//! realignment screening, and entanglement-breaking certification in the
//! cuts where the PPT criterion is exact.

use crate::channel::{choi_of_map, compose, ChoiMatrix, LinearMapTensor};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Grid, Subsystem};
use crate::spectra;
use crate::state::BipartiteState;
use crate::witness::Witness;
use crate::C64;
use serde::{Deserialize, Serialize};

/// PPT verdict with the minimum eigenvalues of the state and of its
/// subsystem-A partial transpose as evidence.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PptVerdict {
    pub is_positive: bool,
    pub is_ppt: bool,
    pub min_eig_state: f64,
    pub min_eig_pt: f64,
    pub cut: (usize, usize),
}

/// PPT test on a raw Hermitian matrix under the given cut. Positivity of
/// the input is reported, not assumed.
pub fn ppt_test_matrix(
    matrix: &DenseMatrix,
    dim_a: usize,
    dim_b: usize,
    tol: f64,
) -> Result<PptVerdict> {
    crate::state::check_cut(matrix, dim_a, dim_b)?;
    let state_check = spectra::is_psd(matrix, tol)?;
    let pt = matrix.partial_transpose(dim_a, dim_b, Subsystem::A)?;
    let pt_check = spectra::is_psd(&pt, tol)?;
    Ok(PptVerdict {
        is_positive: state_check.is_psd,
        is_ppt: state_check.is_psd && pt_check.is_psd,
        min_eig_state: state_check.min_eigenvalue,
        min_eig_pt: pt_check.min_eigenvalue,
        cut: (dim_a, dim_b),
    })
}

pub fn ppt_test(state: &BipartiteState, tol: f64) -> PptVerdict {
    ppt_test_matrix(state.matrix(), state.dim_a(), state.dim_b(), tol)
        .expect("state dimensions are validated at construction")
}

/// The pairing `⟨ρ, ψ⟩ = tr(ρ·C_ψᵗ)`. A negative value certifies that the
/// state is entangled; a decomposable witness stays nonnegative on every
/// PPT state.
pub fn pairing(state: &BipartiteState, witness: &Witness) -> Result<f64> {
    if (state.dim_a(), state.dim_b()) != witness.cut() {
        return Err(Error::DimensionMismatch(format!(
            "state cut {}x{} vs witness cut {}x{}",
            state.dim_a(),
            state.dim_b(),
            witness.cut().0,
            witness.cut().1
        )));
    }
    pairing_matrix(state.matrix(), witness)
}

pub fn pairing_matrix(matrix: &DenseMatrix, witness: &Witness) -> Result<f64> {
    if matrix.rows() != witness.side() {
        return Err(Error::DimensionMismatch(format!(
            "state side {} vs witness Choi side {}",
            matrix.rows(),
            witness.side()
        )));
    }
    let product = matrix.matmul(&witness.choi().matrix().transpose())?;
    Ok(product.trace().re)
}

/// Schmidt rank of a pure state: the numerical rank of the vector reshaped
/// into a `dim_a × dim_b` matrix.
pub fn schmidt_rank(pure: &[C64], dim_a: usize, dim_b: usize, tol: f64) -> Result<usize> {
    if pure.len() != dim_a * dim_b {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} under a {dim_a}x{dim_b} cut",
            pure.len()
        )));
    }
    let m = DenseMatrix::from_complex_vec(dim_a, dim_b, pure.to_vec())?;
    Ok(spectra::numerical_rank(&m, tol))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RealignmentReport {
    /// Sum of singular values of the realigned, trace-normalized state.
    pub ccnr_value: f64,
    /// True when the value exceeds `1 + tol`, which certifies entanglement.
    pub detects: bool,
}

/// Realignment (CCNR) screen. The realigned matrix is
/// `R[(i,j),(k,l)] = ρ[(i,k),(j,l)]`; separable states keep the sum of its
/// singular values at or below one.
pub fn realignment_test(state: &BipartiteState, tol: f64) -> Result<RealignmentReport> {
    let rho = state.normalized_matrix()?;
    let (da, db) = (state.dim_a(), state.dim_b());
    let mut r = Grid::<C64>::zeros(da * da, db * db);
    let g = rho.to_f64_grid();
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    r.set(i * da + j, k * db + l, *g.get(i * db + k, j * db + l));
                }
            }
        }
    }
    let ccnr: f64 = spectra::singular_values(&DenseMatrix::F64(r)).iter().sum();
    Ok(RealignmentReport { ccnr_value: ccnr, detects: ccnr > 1.0 + tol })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum EbVerdict {
    /// The Choi matrix is separable: PPT in a cut where PPT is exact
    /// (2⊗2, 2⊗3, 3⊗2, or a trivial factor).
    EbCertified,
    /// The Choi matrix is certainly entangled (NPPT, a negative witness
    /// pairing, or a realignment detection).
    NotEbCertified { reason: String },
    /// No certificate either way; separability is never claimed here.
    Undecided,
}

/// Entanglement-breaking test on a Choi matrix. In cuts where the PPT
/// criterion is exact, PPT decides separability; elsewhere the registered
/// witnesses and the realignment screen can only refute.
pub fn eb_test(choi: &ChoiMatrix, tol: f64, witnesses: &[Witness]) -> Result<EbVerdict> {
    let (n, m) = choi.cut();
    let verdict = ppt_test_matrix(choi.matrix(), n, m, tol)?;
    if !verdict.is_positive {
        return Err(Error::NotPsd { min_eig: verdict.min_eig_state });
    }
    if !verdict.is_ppt {
        return Ok(EbVerdict::NotEbCertified {
            reason: format!("NPPT: partial transpose min eigenvalue {:.6e}", verdict.min_eig_pt),
        });
    }
    if decidable_cut(n, m) {
        return Ok(EbVerdict::EbCertified);
    }
    let state = BipartiteState::with_psd_tol(choi.matrix().clone(), n, m, tol.max(crate::DEFAULT_PSD_TOL))?;
    for w in witnesses.iter().filter(|w| w.side() == choi.side()) {
        let value = pairing(&state, w)?;
        if value < -tol {
            return Ok(EbVerdict::NotEbCertified {
                reason: format!("witness {} pairing {value:.6e}", w.label()),
            });
        }
    }
    let realign = realignment_test(&state, tol)?;
    if realign.detects {
        return Ok(EbVerdict::NotEbCertified {
            reason: format!("realignment value {:.6} exceeds 1", realign.ccnr_value),
        });
    }
    Ok(EbVerdict::Undecided)
}

/// PPT is equivalent to separability exactly in 2⊗2, 2⊗3 and 3⊗2, and
/// trivially when either factor is one-dimensional.
fn decidable_cut(n: usize, m: usize) -> bool {
    n == 1 || m == 1 || n * m <= 6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "result")]
pub enum EbIndexResult {
    /// First self-composition power certified entanglement breaking.
    Found { k: usize },
    /// Every power up to the budget was certified not-EB.
    NotFoundWithin { k_max: usize },
    /// Some powers could not be decided; their exponents are listed.
    UndecidedAt { powers: Vec<usize> },
}

/// Iterate self-composition of a CP map on `M_n`, running [`eb_test`] on
/// each power's Choi matrix, and report the first certified power.
pub fn eb_index(
    map: &LinearMapTensor,
    k_max: usize,
    tol: f64,
    witnesses: &[Witness],
) -> Result<EbIndexResult> {
    if map.in_dim() != map.out_dim() {
        return Err(Error::InvalidArgument(
            "entanglement-breaking index needs a square map".into(),
        ));
    }
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let props = crate::channel::channel_properties(map, crate::DEFAULT_PSD_TOL)?;
    if !props.is_cp {
        return Err(Error::NotPsd { min_eig: props.min_eig_choi });
    }
    let mut power = map.clone();
    let mut undecided = Vec::new();
    for k in 1..=k_max {
        if k > 1 {
            power = compose(map, &power)?;
        }
        match eb_test(&choi_of_map(&power), tol, witnesses)? {
            EbVerdict::EbCertified => return Ok(EbIndexResult::Found { k }),
            EbVerdict::NotEbCertified { .. } => {}
            EbVerdict::Undecided => undecided.push(k),
        }
    }
    if undecided.is_empty() {
        Ok(EbIndexResult::NotFoundWithin { k_max })
    } else {
        Ok(EbIndexResult::UndecidedAt { powers: undecided })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Backend;
    use crate::witness::{builtin_registry, WitnessClass};

    fn max_entangled_2x2() -> BipartiteState {
        // (|00> + |11>)/sqrt(2) projector
        let m = DenseMatrix::from_f64_rows(&[
            &[0.5, 0.0, 0.0, 0.5],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.5, 0.0, 0.0, 0.5],
        ]);
        BipartiteState::new(m, 2, 2).unwrap()
    }

    #[test]
    fn max_entangled_is_nppt() {
        let v = ppt_test(&max_entangled_2x2(), 1e-9);
        assert!(v.is_positive);
        assert!(!v.is_ppt);
        assert!((v.min_eig_pt + 0.5).abs() < 1e-10);
    }

    #[test]
    fn all_ones_state_is_ppt() {
        let ones = DenseMatrix::from_int_fractions(9, 9, &[(1, 1); 81]).unwrap();
        let s = BipartiteState::new(ones, 3, 3).unwrap();
        let v = ppt_test(&s, 1e-9);
        assert!(v.is_ppt);
    }

    #[test]
    fn pairing_with_trace_map_is_trace() {
        // x ↦ tr(x)·I has the identity as Choi matrix
        let w = Witness::new(
            LinearMapTensor::reduction_style_map(2, 0, 1),
            WitnessClass::CompletelyPositive,
            "trace-times-identity",
        )
        .unwrap();
        let s = max_entangled_2x2();
        let value = pairing(&s, &w).unwrap();
        assert!((value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pairing_dimension_error() {
        let w = builtin_registry(3).pop().unwrap();
        assert!(pairing(&max_entangled_2x2(), &w).is_err());
        // same side, mismatched cut
        let w4 = builtin_registry(2).pop().unwrap();
        let recut = max_entangled_2x2().recut(1, 4).unwrap();
        assert!(pairing(&recut, &w4).is_err());
    }

    #[test]
    fn schmidt_rank_fixtures() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        // (1,1,0,1) reshapes to [[1,1],[0,1]], rank 2
        assert_eq!(schmidt_rank(&[one, one, zero, one], 2, 2, 1e-9).unwrap(), 2);
        // product vector u ⊗ v
        let prod = [one, one.scale(2.0), one.scale(3.0), one.scale(6.0)];
        assert_eq!(schmidt_rank(&prod, 2, 2, 1e-9).unwrap(), 1);
        // maximally entangled in 3⊗3 reshapes to the identity
        let mut v = vec![zero; 9];
        v[0] = one;
        v[4] = one;
        v[8] = one;
        assert_eq!(schmidt_rank(&v, 3, 3, 1e-9).unwrap(), 3);
        assert!(schmidt_rank(&v, 2, 2, 1e-9).is_err());
    }

    #[test]
    fn realignment_of_product_state_is_one() {
        let m = DenseMatrix::from_f64_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
        ]);
        let s = BipartiteState::new(m, 2, 2).unwrap();
        let r = realignment_test(&s, 1e-9).unwrap();
        assert!((r.ccnr_value - 1.0).abs() < 1e-12);
        assert!(!r.detects);
    }

    #[test]
    fn realignment_detects_max_entangled() {
        let r = realignment_test(&max_entangled_2x2(), 1e-9).unwrap();
        assert!((r.ccnr_value - 2.0).abs() < 1e-10);
        assert!(r.detects);
    }

    #[test]
    fn eb_test_certifies_ppt_in_2x2() {
        // completely depolarizing: Choi = I/2, PPT, 2⊗2 cut
        let dep = LinearMapTensor::reduction_style_map(2, 0, 1);
        let choi = choi_of_map(&dep);
        assert_eq!(eb_test(&choi, 1e-9, &[]).unwrap(), EbVerdict::EbCertified);
    }

    #[test]
    fn eb_test_rejects_identity_channel() {
        let choi = choi_of_map(&LinearMapTensor::identity(2, Backend::Rational));
        assert!(matches!(
            eb_test(&choi, 1e-9, &[]).unwrap(),
            EbVerdict::NotEbCertified { .. }
        ));
    }

    #[test]
    fn eb_index_depolarizing_found_at_one() {
        let dep = LinearMapTensor::reduction_style_map(2, 0, 1);
        let r = eb_index(&dep, 4, 1e-9, &[]).unwrap();
        assert_eq!(r, EbIndexResult::Found { k: 1 });
    }

    #[test]
    fn eb_index_identity_never_found() {
        let id = LinearMapTensor::identity(2, Backend::Rational);
        let r = eb_index(&id, 5, 1e-9, &[]).unwrap();
        assert_eq!(r, EbIndexResult::NotFoundWithin { k_max: 5 });
    }

    #[test]
    fn eb_index_rejects_non_cp() {
        let tau = LinearMapTensor::transpose_map(2, Backend::Rational);
        assert!(eb_index(&tau, 3, 1e-9, &[]).is_err());
        let rect = LinearMapTensor::zeros(2, 3, Backend::Float64);
        assert!(eb_index(&rect, 3, 1e-9, &[]).is_err());
    }
}
