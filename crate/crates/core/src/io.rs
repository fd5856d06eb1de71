// SPDX-License-Identifier: Apache-2.0

//! JSON file formats for states, observables, bases, probability vectors
//! and constraint lists.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::linalg::{Complex, ComplexMatrix, HermitianOperator};
use crate::state::{DensityMatrix, Observable};
use crate::{Error, Result};

/// Square complex matrix stored as rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
}

impl StateFile {
    pub fn from_matrix(m: &ComplexMatrix, label: Option<String>) -> Self {
        let matrix = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        Self {
            dim: m.nrows(),
            matrix,
            label,
            basis: None,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::Parse("dim must be positive".into()));
        }
        if self.matrix.len() != d || self.matrix.iter().any(|r| r.len() != d) {
            return Err(Error::Parse(format!("matrix is not {d}x{d}")));
        }
        Ok(ComplexMatrix::from_fn(d, d, |i, j| {
            let [re, im] = self.matrix[i][j];
            Complex::new(re, im)
        }))
    }
}

/// Orthonormal basis stored as a list of column vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisFile {
    pub dim: usize,
    pub vectors: Vec<Vec<[f64; 2]>>,
}

impl BasisFile {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let d = self.dim;
        if self.vectors.len() != d || self.vectors.iter().any(|v| v.len() != d) {
            return Err(Error::Parse(format!("basis must list {d} vectors of length {d}")));
        }
        Ok(ComplexMatrix::from_fn(d, d, |i, k| {
            let [re, im] = self.vectors[k][i];
            Complex::new(re, im)
        }))
    }
}

/// Raw file contents together with the parsed JSON document.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
    pub json: Value,
}

pub fn load(path: &Path) -> Result<Loaded> {
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let json = serde_json::from_slice(&bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        path: path.to_path_buf(),
        bytes,
        json,
    })
}

fn from_value<T: serde::de::DeserializeOwned>(v: &Value, what: &str) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn parse_matrix(v: &Value) -> Result<ComplexMatrix> {
    from_value::<StateFile>(v, "state file")?.to_matrix()
}

pub fn parse_density(v: &Value) -> Result<DensityMatrix> {
    DensityMatrix::new(parse_matrix(v)?)
}

pub fn parse_operator(v: &Value) -> Result<HermitianOperator> {
    HermitianOperator::new(parse_matrix(v)?)
}

pub fn parse_basis(v: &Value) -> Result<ComplexMatrix> {
    from_value::<BasisFile>(v, "basis file")?.to_matrix()
}

/// Accepts `{"probabilities": [...]}` or a bare array.
pub fn parse_probabilities(v: &Value) -> Result<Vec<f64>> {
    let arr = match v {
        Value::Object(map) => map
            .get("probabilities")
            .ok_or_else(|| Error::Parse("missing \"probabilities\"".into()))?,
        other => other,
    };
    from_value(arr, "probabilities")
}

/// One constraint entry; `observable` is a path (relative to the
/// constraints file) or an inline state-file object.
#[derive(Debug, Clone, Deserialize)]
struct ConstraintEntry {
    observable: Value,
    mean: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct ConstraintsFile {
    constraints: Vec<ConstraintEntry>,
}

pub type ConstraintList = Vec<(Observable, f64)>;

/// Parsed constraint list plus every referenced file, in order.
pub fn load_constraints(path: &Path) -> Result<(ConstraintList, Vec<Loaded>)> {
    let top = load(path)?;
    let file: ConstraintsFile = from_value(&top.json, "constraints file")?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::with_capacity(file.constraints.len());
    let mut loaded = vec![top.clone()];
    for entry in &file.constraints {
        let op = match &entry.observable {
            Value::String(rel) => {
                let l = load(&dir.join(rel))?;
                let op = parse_operator(&l.json)?;
                loaded.push(l);
                op
            }
            inline => parse_operator(inline)?,
        };
        out.push((Observable::new(op), entry.mean));
    }
    Ok((out, loaded))
}

pub fn matrix_to_json(m: &ComplexMatrix, label: Option<String>) -> Result<String> {
    serde_json::to_string_pretty(&StateFile::from_matrix(m, label)).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix, label: Option<String>) -> Result<()> {
    let text = matrix_to_json(m, label)?;
    fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_probabilities(path: &Path, p: &[f64]) -> Result<()> {
    let text = serde_json::to_string_pretty(&serde_json::json!({ "probabilities": p }))
        .map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_state_and_basis() {
        let v: Value = serde_json::from_str(r#"{"dim":2,"matrix":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]],"label":"mixed"}"#).unwrap();
        let rho = parse_density(&v).unwrap();
        assert_eq!(rho, DensityMatrix::maximally_mixed(2));
        let b: Value = serde_json::from_str(r#"{"dim":2,"vectors":[[[0,0],[1,0]],[[1,0],[0,0]]]}"#).unwrap();
        let m = parse_basis(&b).unwrap();
        assert_eq!(m[(1, 0)], Complex::new(1.0, 0.0));
        assert_eq!(m[(0, 1)], Complex::new(1.0, 0.0));
    }

    #[test]
    fn probabilities_both_forms() {
        let a: Value = serde_json::from_str("[0.25, 0.75]").unwrap();
        let b: Value = serde_json::from_str(r#"{"probabilities":[0.25,0.75]}"#).unwrap();
        assert_eq!(parse_probabilities(&a).unwrap(), parse_probabilities(&b).unwrap());
        assert!(parse_probabilities(&serde_json::json!({"p": [1.0]})).is_err());
    }

    #[test]
    fn malformed_matrix_is_rejected() {
        let v: Value = serde_json::from_str(r#"{"dim":2,"matrix":[[[1,0]]]}"#).unwrap();
        assert!(matches!(parse_matrix(&v), Err(Error::Parse(_))));
    }

    #[test]
    fn constraints_resolve_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        write_matrix(&dir.path().join("sz.json"), HermitianOperator::pauli(3).matrix(), None).unwrap();
        let text = r#"{"constraints":[{"observable":"sz.json","mean":0.2},
            {"observable":{"dim":2,"matrix":[[[0,0],[1,0]],[[1,0],[0,0]]]},"mean":0.1}]}"#;
        fs::write(dir.path().join("c.json"), text).unwrap();
        let (cs, loaded) = load_constraints(&dir.path().join("c.json")).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(loaded.len(), 2);
        assert_eq!(cs[0].0.operator(), &HermitianOperator::pauli(3));
        assert_eq!(cs[1].0.operator(), &HermitianOperator::pauli(1));
    }

    proptest! {
        #[test]
        fn state_file_round_trip_is_bit_exact(
            d in 1usize..6,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = ComplexMatrix::from_fn(d, d, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let m = &a * a.adjoint();
            let tr = m.trace().re;
            let rho = DensityMatrix::new(m / Complex::new(tr, 0.0)).unwrap();
            let text = matrix_to_json(rho.matrix(), Some("x".into())).unwrap();
            let back = parse_density(&serde_json::from_str(&text).unwrap()).unwrap();
            prop_assert_eq!(back.matrix(), rho.matrix());
        }
    }
}
