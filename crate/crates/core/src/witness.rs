//! Entanglement witnesses: positive maps with classification metadata,
//! loadable from a registry directory of map-interchange files.

use crate::channel::{choi_of_map, ChoiMatrix, LinearMapTensor};
use crate::error::{Error, Result};
use crate::scalar::Backend;
use crate::spectra;
use crate::DEFAULT_PSD_TOL;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessClass {
    CompletelyPositive,
    CompletelyCopositive,
    DecomposableSum,
    IndecomposableCandidate,
    Unverified,
}

/// A positive map used in pairing batteries. The Choi matrix is cached;
/// decomposable witnesses keep their CP and co-CP parts explicitly.
#[derive(Clone, Debug)]
pub struct Witness {
    map: LinearMapTensor,
    class: WitnessClass,
    label: String,
    choi: ChoiMatrix,
    parts: Option<Box<(LinearMapTensor, LinearMapTensor)>>,
}

impl Witness {
    /// Build a witness and verify the classification's defining property
    /// (CP ⇒ Choi PSD, co-CP ⇒ Choi partial transpose PSD).
    pub fn new(map: LinearMapTensor, class: WitnessClass, label: impl Into<String>) -> Result<Self> {
        let choi = choi_of_map(&map);
        match class {
            WitnessClass::CompletelyPositive => {
                let c = spectra::is_psd(choi.matrix(), DEFAULT_PSD_TOL)?;
                if !c.is_psd {
                    return Err(Error::NotPsd { min_eig: c.min_eigenvalue });
                }
            }
            WitnessClass::CompletelyCopositive => {
                let c = spectra::is_psd(&choi.partial_transpose(), DEFAULT_PSD_TOL)?;
                if !c.is_psd {
                    return Err(Error::NotPsd { min_eig: c.min_eigenvalue });
                }
            }
            WitnessClass::DecomposableSum => {
                return Err(Error::InvalidArgument(
                    "decomposable witnesses are built from explicit parts".into(),
                ));
            }
            WitnessClass::IndecomposableCandidate => {
                // candidates must at least survive the see-saw positivity
                // screen before registration; a negative product pair
                // disqualifies the map as a witness outright
                let report = crate::heuristic::positivity_heuristic(
                    &map,
                    crate::heuristic::DEFAULT_RESTARTS,
                    crate::heuristic::DEFAULT_ITERS,
                    0,
                );
                if report.min_value < -1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "candidate witness fails the positivity screen (value {:.3e})",
                        report.min_value
                    )));
                }
            }
            WitnessClass::Unverified => {}
        }
        Ok(Witness { map, class, label: label.into(), choi, parts: None })
    }

    /// Decomposable witness from an explicit (CP part, co-CP part) pair.
    pub fn decomposable(
        cp_part: LinearMapTensor,
        ccp_part: LinearMapTensor,
        label: impl Into<String>,
    ) -> Result<Self> {
        let cp_choi = choi_of_map(&cp_part);
        let c = spectra::is_psd(cp_choi.matrix(), DEFAULT_PSD_TOL)?;
        if !c.is_psd {
            return Err(Error::NotPsd { min_eig: c.min_eigenvalue });
        }
        let ccp_choi = choi_of_map(&ccp_part);
        let p = spectra::is_psd(&ccp_choi.partial_transpose(), DEFAULT_PSD_TOL)?;
        if !p.is_psd {
            return Err(Error::NotPsd { min_eig: p.min_eigenvalue });
        }
        let sum_choi = cp_choi.matrix().add(ccp_choi.matrix())?;
        let sum = crate::channel::map_of_choi(&sum_choi, cp_part.in_dim(), cp_part.out_dim())?;
        let choi = choi_of_map(&sum);
        Ok(Witness {
            map: sum,
            class: WitnessClass::DecomposableSum,
            label: label.into(),
            choi,
            parts: Some(Box::new((cp_part, ccp_part))),
        })
    }

    pub fn map(&self) -> &LinearMapTensor {
        &self.map
    }

    pub fn classification(&self) -> WitnessClass {
        self.class
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn choi(&self) -> &ChoiMatrix {
        &self.choi
    }

    pub fn parts(&self) -> Option<&(LinearMapTensor, LinearMapTensor)> {
        self.parts.as_deref()
    }

    /// Side of the Choi matrix; pairings require a state of the same side.
    pub fn side(&self) -> usize {
        self.choi.side()
    }

    pub fn cut(&self) -> (usize, usize) {
        self.choi.cut()
    }
}

/// The witnesses shipped with the tool for maps on `M_n`: the identity
/// (CP), the transpose (co-CP), and two reduction-style maps
/// `tr(x)I − x` and `tr(x)I − x/2` (both co-CP). All are decomposable, so
/// none of them can fire on a PPT state; they are the sanity battery, not a
/// PPTES detector.
pub fn builtin_registry(n: usize) -> Vec<Witness> {
    vec![
        Witness::new(
            LinearMapTensor::identity(n, Backend::Rational),
            WitnessClass::CompletelyPositive,
            format!("identity-m{n}"),
        )
        .expect("identity map is CP"),
        Witness::new(
            LinearMapTensor::transpose_map(n, Backend::Rational),
            WitnessClass::CompletelyCopositive,
            format!("transpose-m{n}"),
        )
        .expect("transpose map is co-CP"),
        Witness::new(
            LinearMapTensor::reduction_style_map(n, 1, 1),
            WitnessClass::CompletelyCopositive,
            format!("reduction-m{n}"),
        )
        .expect("reduction map is co-CP"),
        Witness::new(
            LinearMapTensor::reduction_style_map(n, 1, 2),
            WitnessClass::CompletelyCopositive,
            format!("half-reduction-m{n}"),
        )
        .expect("half-reduction map is co-CP"),
    ]
}
