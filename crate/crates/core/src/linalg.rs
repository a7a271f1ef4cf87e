//! Dense complex matrix helpers.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, WalkError};
use crate::C64;

/// `‖M†M − I‖_max`.
pub fn unitarity_deviation(m: &DMatrix<C64>) -> f64 {
    let gram = m.adjoint() * m;
    let n = gram.nrows();
    (gram - DMatrix::<C64>::identity(n, n))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

/// Entrywise `max |a − b|`. Panics on shape mismatch.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn ensure_square(m: &DMatrix<C64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(WalkError::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Row-major nested `[[ [re, im], ... ], ...]` form of a complex matrix.
pub fn to_rows(m: &DMatrix<C64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect()
}

pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<C64>> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
        return Err(WalkError::InvalidArgument(format!(
            "ragged matrix: row of length {} in a matrix with {} columns",
            bad.len(),
            cols
        )));
    }
    Ok(DMatrix::from_fn(n, cols, |r, c| {
        let [re, im] = rows[r][c];
        C64::new(re, im)
    }))
}

/// Serde adapter for `DMatrix<C64>` in the nested `[re, im]` row form.
pub mod rows_serde {
    use super::*;

    pub fn serialize<S: Serializer>(
        m: &DMatrix<C64>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<DMatrix<C64>, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
