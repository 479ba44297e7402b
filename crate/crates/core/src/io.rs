//! JSON interchange formats.
//!
//! Matrices serialize as `{rows, cols, backend, entries, entries_rational?,
//! dimA?, dimB?}` with `entries` a row-major list of `[re, im]` float pairs
//! and `entries_rational` a parallel list of `["p/q", "r/s"]` decimal
//! integer strings present exactly when the backend is rational. Maps
//! serialize as `{inDim, outDim, coeffs}` with `coeffs` nested
//! `[k][l][i][j]` and each coefficient either a `[re, im]` pair or a pair
//! of rational strings. The Choi block convention is `block (i,j) = φ(e_ij)`.

use crate::channel::{ChoiMatrix, LinearMapTensor, Tensor};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Grid};
use crate::scalar::{format_rational, parse_crat, Backend, CRat, Scalar, C64};
use crate::witness::{Witness, WitnessClass};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub backend: Backend,
    pub entries: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entries_rational: Option<Vec<[String; 2]>>,
    #[serde(rename = "dimA", skip_serializing_if = "Option::is_none")]
    pub dim_a: Option<usize>,
    #[serde(rename = "dimB", skip_serializing_if = "Option::is_none")]
    pub dim_b: Option<usize>,
}

pub fn matrix_to_json(m: &DenseMatrix, cut: Option<(usize, usize)>) -> MatrixJson {
    let (rows, cols) = (m.rows(), m.cols());
    let entries = (0..rows * cols)
        .map(|at| {
            let v = m.get_c64(at / cols, at % cols);
            [v.re, v.im]
        })
        .collect();
    let entries_rational = m.as_rational().map(|g| {
        g.data()
            .iter()
            .map(|v| [format_rational(&v.re), format_rational(&v.im)])
            .collect()
    });
    MatrixJson {
        rows,
        cols,
        backend: m.backend(),
        entries,
        entries_rational,
        dim_a: cut.map(|c| c.0),
        dim_b: cut.map(|c| c.1),
    }
}

pub fn matrix_from_json(json: &MatrixJson) -> Result<DenseMatrix> {
    match json.backend {
        Backend::Rational => {
            let raw = json.entries_rational.as_ref().ok_or_else(|| {
                Error::InvalidArgument("rational backend without entries_rational".into())
            })?;
            let data: Result<Vec<CRat>> = raw.iter().map(|[re, im]| parse_crat(re, im)).collect();
            DenseMatrix::from_rational_vec(json.rows, json.cols, data?)
        }
        Backend::Float64 => {
            let data: Vec<C64> = json.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
            DenseMatrix::from_complex_vec(json.rows, json.cols, data)
        }
    }
}

pub fn write_matrix(path: &Path, m: &DenseMatrix, cut: Option<(usize, usize)>) -> Result<()> {
    let json = matrix_to_json(m, cut);
    std::fs::write(path, serde_json::to_string_pretty(&json)?)?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<(DenseMatrix, Option<(usize, usize)>)> {
    let text = std::fs::read_to_string(path)?;
    let json: MatrixJson = serde_json::from_str(&text)?;
    let cut = match (json.dim_a, json.dim_b) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    Ok((matrix_from_json(&json)?, cut))
}

pub fn write_choi(path: &Path, choi: &ChoiMatrix) -> Result<()> {
    write_matrix(path, choi.matrix(), Some(choi.cut()))
}

/// One map coefficient: a float pair or a pair of rational strings.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffJson {
    Float([f64; 2]),
    Rational([String; 2]),
}

#[derive(Serialize, Deserialize)]
pub struct MapJson {
    #[serde(rename = "inDim")]
    pub in_dim: usize,
    #[serde(rename = "outDim")]
    pub out_dim: usize,
    pub coeffs: Vec<Vec<Vec<Vec<CoeffJson>>>>,
}

pub fn map_to_json(map: &LinearMapTensor) -> MapJson {
    let (n, m) = (map.in_dim(), map.out_dim());
    let coeff = |k: usize, l: usize, i: usize, j: usize| match map {
        LinearMapTensor::F64(t) => {
            let v = t.get(k, l, i, j);
            CoeffJson::Float([v.re, v.im])
        }
        LinearMapTensor::Rational(t) => {
            let v = t.get(k, l, i, j);
            CoeffJson::Rational([format_rational(&v.re), format_rational(&v.im)])
        }
    };
    let coeffs = (0..m)
        .map(|k| {
            (0..m)
                .map(|l| {
                    (0..n)
                        .map(|i| (0..n).map(|j| coeff(k, l, i, j)).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    MapJson { in_dim: n, out_dim: m, coeffs }
}

pub fn map_from_json(json: &MapJson) -> Result<LinearMapTensor> {
    let (n, m) = (json.in_dim, json.out_dim);
    let shape_err = || Error::DimensionMismatch("map coeffs shape".into());
    if json.coeffs.len() != m {
        return Err(shape_err());
    }
    let mut rational = true;
    for k in &json.coeffs {
        if k.len() != m {
            return Err(shape_err());
        }
        for l in k {
            if l.len() != n {
                return Err(shape_err());
            }
            for i in l {
                if i.len() != n {
                    return Err(shape_err());
                }
                for c in i {
                    if matches!(c, CoeffJson::Float(_)) {
                        rational = false;
                    }
                }
            }
        }
    }
    if rational {
        let mut t = Tensor::<CRat>::zeros(n, m);
        for (k, kk) in json.coeffs.iter().enumerate() {
            for (l, ll) in kk.iter().enumerate() {
                for (i, ii) in ll.iter().enumerate() {
                    for (j, c) in ii.iter().enumerate() {
                        if let CoeffJson::Rational([re, im]) = c {
                            t.set(k, l, i, j, parse_crat(re, im)?);
                        }
                    }
                }
            }
        }
        Ok(LinearMapTensor::Rational(t))
    } else {
        let mut t = Tensor::<C64>::zeros(n, m);
        for (k, kk) in json.coeffs.iter().enumerate() {
            for (l, ll) in kk.iter().enumerate() {
                for (i, ii) in ll.iter().enumerate() {
                    for (j, c) in ii.iter().enumerate() {
                        let v = match c {
                            CoeffJson::Float([re, im]) => C64::new(*re, *im),
                            CoeffJson::Rational([re, im]) => parse_crat(re, im)?.to_c64(),
                        };
                        t.set(k, l, i, j, v);
                    }
                }
            }
        }
        Ok(LinearMapTensor::F64(t))
    }
}

pub fn write_map(path: &Path, map: &LinearMapTensor) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(&map_to_json(map))?)?;
    Ok(())
}

pub fn read_map(path: &Path) -> Result<LinearMapTensor> {
    let text = std::fs::read_to_string(path)?;
    let json: MapJson = serde_json::from_str(&text)?;
    map_from_json(&json)
}

// ---------------------------------------------------------------------------
// witness registry

#[derive(Serialize, Deserialize)]
pub struct WitnessManifestEntry {
    pub label: String,
    pub classification: WitnessClass,
    /// Map file for single-map witnesses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Explicit parts for decomposable witnesses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cp_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ccp_file: Option<String>,
}

#[derive(Serialize, Deserialize)]
pub struct WitnessManifest {
    pub witnesses: Vec<WitnessManifestEntry>,
}

/// Load a witness registry: a directory containing `manifest.json` and the
/// map files it references. Classifications are re-validated on load.
pub fn load_witness_registry(dir: &Path) -> Result<Vec<Witness>> {
    let manifest_path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path)?;
    let manifest: WitnessManifest = serde_json::from_str(&text)?;
    let mut out = Vec::with_capacity(manifest.witnesses.len());
    for entry in &manifest.witnesses {
        let witness = match (&entry.file, &entry.cp_file, &entry.ccp_file) {
            (Some(file), None, None) => {
                let map = read_map(&dir.join(file))?;
                Witness::new(map, entry.classification, entry.label.clone())?
            }
            (None, Some(cp), Some(ccp)) => {
                let cp = read_map(&dir.join(cp))?;
                let ccp = read_map(&dir.join(ccp))?;
                Witness::decomposable(cp, ccp, entry.label.clone())?
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "witness {:?} needs either `file` or both `cp_file` and `ccp_file`",
                    entry.label
                )))
            }
        };
        out.push(witness);
    }
    Ok(out)
}

/// Write a registry of single-map witnesses (the builtin set).
pub fn save_witness_registry(dir: &Path, witnesses: &[Witness]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for w in witnesses {
        let file = format!("{}.json", w.label());
        write_map(&dir.join(&file), w.map())?;
        entries.push(WitnessManifestEntry {
            label: w.label().to_string(),
            classification: w.classification(),
            file: Some(file),
            cp_file: None,
            ccp_file: None,
        });
    }
    let manifest = WitnessManifest { witnesses: entries };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

#[allow(dead_code)]
fn grid_shape_hint(_: &Grid<C64>) {}
