//! JSON file formats shared with the command-line tool.
//!
//! Matrices are 4×4 row-major arrays of `[re, im]` pairs. A POVM is either
//! one of the built-in names or `{"effects": [matrix, ...]}`. A count file
//! is `{"povm": <povm>, "counts": [n_0, n_1, ...]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, HermitianMatrix, Mat4, C64, DIM};
use crate::measurement::{product_sic_povm, witness_povm, Povm};

pub type MatrixJson = [[[f64; 2]; DIM]; DIM];

pub fn matrix_to_json(m: &Mat4) -> MatrixJson {
    let mut out = [[[0.0; 2]; DIM]; DIM];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let z = m.get(i, j);
            *cell = [z.re, z.im];
        }
    }
    out
}

pub fn matrix_from_json(m: &MatrixJson) -> Mat4 {
    Mat4::from_fn(|i, j| C64::new(m[i][j][0], m[i][j][1]))
}

pub fn hermitian_from_json(m: &MatrixJson) -> Result<HermitianMatrix> {
    HermitianMatrix::new(matrix_from_json(m))
}

pub fn density_from_json(m: &MatrixJson) -> Result<DensityMatrix> {
    DensityMatrix::new(hermitian_from_json(m)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InlinePovm {
    pub effects: Vec<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PovmSpec {
    Named(String),
    Inline(InlinePovm),
}

impl PovmSpec {
    pub fn build(&self) -> Result<Povm> {
        match self {
            PovmSpec::Named(name) => named_povm(name),
            PovmSpec::Inline(inline) => {
                let effects = inline
                    .effects
                    .iter()
                    .map(hermitian_from_json)
                    .collect::<Result<Vec<_>>>()?;
                Povm::new("inline", effects)
            }
        }
    }
}

pub fn named_povm(name: &str) -> Result<Povm> {
    match name {
        "witness" => Ok(witness_povm()),
        "product_sic" => Ok(product_sic_povm()),
        other => Err(Error::InvalidPovm(format!(
            "unknown POVM name {other:?} (expected \"witness\" or \"product_sic\")"
        ))),
    }
}

impl From<&Povm> for InlinePovm {
    fn from(povm: &Povm) -> Self {
        InlinePovm {
            effects: povm.effects().iter().map(|e| matrix_to_json(e.mat())).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub povm: Option<PovmSpec>,
    pub counts: Vec<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_file_named_and_inline() {
        let f: CountFile = serde_json::from_str(r#"{"povm": "witness", "counts": [75, 25]}"#).unwrap();
        assert_eq!(f.povm, Some(PovmSpec::Named("witness".into())));
        assert_eq!(f.povm.unwrap().build().unwrap().len(), 2);

        let f: CountFile = serde_json::from_str(r#"{"counts": [1, 2]}"#).unwrap();
        assert!(f.povm.is_none());

        let inline = InlinePovm::from(&witness_povm());
        let text = serde_json::to_string(&CountFile {
            povm: Some(PovmSpec::Inline(inline)),
            counts: vec![3, 1],
        })
        .unwrap();
        let back: CountFile = serde_json::from_str(&text).unwrap();
        let povm = back.povm.unwrap().build().unwrap();
        assert_eq!(povm.measurement_dimension(), 1);
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(PovmSpec::Named("tetra".into()).build().is_err());
    }

    #[test]
    fn inline_effects_must_sum_to_identity() {
        let half = matrix_to_json(&Mat4::identity().scale(0.5));
        let spec = PovmSpec::Inline(InlinePovm { effects: vec![half, half, half] });
        assert!(spec.build().is_err());
    }
}
