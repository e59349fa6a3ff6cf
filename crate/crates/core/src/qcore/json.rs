//! JSON encodings shared by every file the CLI reads or writes.
//!
//! Complex entries are `[re, im]` pairs, stored row-major next to a `dim`
//! field.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::{c, from_row_major, to_row_major, ComplexMatrix};
use crate::error::Error;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixJson {
            dim: m.nrows(),
            entries: to_row_major(m).iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self, Error> {
        let entries: Vec<_> = j.entries.iter().map(|[re, im]| c(*re, *im)).collect();
        from_row_major(j.dim, &entries)
    }
}

/// `#[serde(with = "matrix_serde")]` adapter for `ComplexMatrix` fields.
pub mod matrix_serde {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        ComplexMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Same as [`matrix_serde`] for `Option<ComplexMatrix>`.
pub mod opt_matrix_serde {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<ComplexMatrix>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(MatrixJson::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ComplexMatrix>, D::Error> {
        match Option::<MatrixJson>::deserialize(d)? {
            Some(j) => ComplexMatrix::try_from(j)
                .map(Some)
                .map_err(serde::de::Error::custom),
            None => Ok(None),
        }
    }
}
