//! Parameterized reference states, constructed exactly on the rational
//! backend, and the two-cut composite channel built from the `agkl` family.

use num::{One, Signed, Zero};
use pptsq_core::channel::{choi_of_map, compose, map_of_choi, ChoiMatrix, LinearMapTensor};
use pptsq_core::error::{Error, Result};
use pptsq_core::matrix::DenseMatrix;
use pptsq_core::scalar::{rat, CRat, Rat};

#[derive(Clone, Debug, PartialEq)]
pub enum StateFamily {
    /// The all-ones 9×9 matrix: a separable 3⊗3 fixture.
    Ones9,
    /// The 9×9 PPT entangled state with diagonal (1, 2, ½, ½, 1, 2, 2, ½, 1).
    Choi3x3,
    /// The 8×8 two-parameter family with diagonal
    /// (a, 1, 1/a, 1, 1, 1/a, 1, a), corner entries `t` and a −1 pattern;
    /// PPT in both the 4⊗2 and 2⊗4 cuts when `0 < a < 1` and `|t| < a`.
    Agkl { a: Rat, t: Rat },
}

impl StateFamily {
    pub fn name(&self) -> &'static str {
        match self {
            StateFamily::Ones9 => "ones9",
            StateFamily::Choi3x3 => "choi3x3",
            StateFamily::Agkl { .. } => "agkl",
        }
    }
}

/// A family matrix together with every tensor cut it is meant to be read
/// under.
#[derive(Clone, Debug)]
pub struct FamilyState {
    pub matrix: DenseMatrix,
    pub cuts: Vec<(usize, usize)>,
}

fn re(r: Rat) -> CRat {
    CRat::new(r, Rat::zero())
}

/// Exact rational construction of a family matrix.
pub fn family_state(family: &StateFamily) -> Result<FamilyState> {
    match family {
        StateFamily::Ones9 => {
            let data = vec![re(Rat::one()); 81];
            Ok(FamilyState {
                matrix: DenseMatrix::from_rational_vec(9, 9, data)?,
                cuts: vec![(3, 3)],
            })
        }
        StateFamily::Choi3x3 => {
            let mut data = vec![re(Rat::zero()); 81];
            let diag = [
                (1, 1), (2, 1), (1, 2), (1, 2), (1, 1), (2, 1), (2, 1), (1, 2), (1, 1),
            ];
            for (i, &(n, d)) in diag.iter().enumerate() {
                data[i * 9 + i] = re(rat(n, d));
            }
            for &(i, j) in &[(0, 4), (0, 8), (4, 8), (1, 3), (2, 6), (5, 7)] {
                data[i * 9 + j] = re(Rat::one());
                data[j * 9 + i] = re(Rat::one());
            }
            Ok(FamilyState {
                matrix: DenseMatrix::from_rational_vec(9, 9, data)?,
                cuts: vec![(3, 3)],
            })
        }
        StateFamily::Agkl { a, t } => Ok(FamilyState {
            matrix: agkl_matrix(a, t)?,
            cuts: vec![(4, 2), (2, 4)],
        }),
    }
}

/// The 8×8 family matrix ρ(a, t), exact in the parameters.
pub fn agkl_matrix(a: &Rat, t: &Rat) -> Result<DenseMatrix> {
    if a.is_zero() {
        return Err(Error::InvalidArgument("agkl family requires a ≠ 0".into()));
    }
    let inv_a = Rat::one() / a.clone();
    let one = Rat::one();
    let diag = [
        a.clone(),
        one.clone(),
        inv_a.clone(),
        one.clone(),
        one.clone(),
        inv_a,
        one,
        a.clone(),
    ];
    let mut data = vec![re(Rat::zero()); 64];
    for (i, v) in diag.into_iter().enumerate() {
        data[i * 8 + i] = re(v);
    }
    data[7] = re(t.clone());
    data[56] = re(t.clone());
    for &(i, j) in &[(1usize, 4usize), (2, 5), (3, 6)] {
        data[i * 8 + j] = re(-Rat::one());
        data[j * 8 + i] = re(-Rat::one());
    }
    DenseMatrix::from_rational_vec(8, 8, data)
}

/// Whether `(a, t)` lies in the documented PPT regime `0 < a < 1`, `|t| < a`.
pub fn in_ppt_regime(a: &Rat, t: &Rat) -> bool {
    a > &Rat::zero() && a < &Rat::one() && t.abs() < *a
}

#[derive(Clone, Debug)]
pub struct CompositeBundle {
    /// ρ(a,t) read as the Choi matrix of a map `M₄ → M₂`.
    pub phi1: LinearMapTensor,
    /// ρ(a,t) read as the Choi matrix of a map `M₂ → M₄`.
    pub phi2: LinearMapTensor,
    /// `φ₂ ∘ φ₁ : M₄ → M₄`.
    pub composite: LinearMapTensor,
    pub choi: ChoiMatrix,
}

/// Build the composite channel from both Choi readings of ρ(a, t), all
/// arithmetic exact in the rational parameters.
pub fn build_composite(a: &Rat, t: &Rat) -> Result<CompositeBundle> {
    let rho = agkl_matrix(a, t)?;
    let phi1 = map_of_choi(&rho, 4, 2)?;
    let phi2 = map_of_choi(&rho, 2, 4)?;
    let composite = compose(&phi2, &phi1)?;
    let choi = choi_of_map(&composite);
    Ok(CompositeBundle { phi1, phi2, composite, choi })
}
