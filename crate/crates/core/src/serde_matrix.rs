//! Serialises complex matrices as a list of columns of `[re, im]` pairs.

use nalgebra::DMatrix;
use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::C64;

pub fn serialize<S: Serializer>(m: &DMatrix<C64>, s: S) -> Result<S::Ok, S::Error> {
    let cols: Vec<Vec<C64>> = m.column_iter().map(|c| c.iter().cloned().collect()).collect();
    cols.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<C64>, D::Error> {
    let cols: Vec<Vec<C64>> = Vec::deserialize(d)?;
    from_columns(&cols).map_err(D::Error::custom)
}

pub fn from_columns(cols: &[Vec<C64>]) -> Result<DMatrix<C64>, String> {
    let nrows = cols.first().map_or(0, Vec::len);
    if cols.iter().any(|c| c.len() != nrows) {
        return Err("matrix columns have unequal lengths".into());
    }
    Ok(DMatrix::from_fn(nrows, cols.len(), |r, c| cols[c][r]))
}
