//! Small matrix helpers shared by the controllers, plus serde adapters that
//! write nalgebra matrices as row-major nested arrays.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const SYMMETRY_TOL: f64 = 1e-12;

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= tol
}

pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    m.is_square() && m.clone().cholesky().is_some()
}

pub fn is_positive_semidefinite(m: &DMatrix<f64>) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(1.0);
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .all(|&e| e >= -1e-12 * scale)
}

/// Validates a stiffness/damping matrix: square of size `dim`, symmetric, and
/// positive definite (or semidefinite when `strict` is false).
pub fn validate_gain(name: &str, m: &DMatrix<f64>, dim: usize, strict: bool) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::InvalidParameter(format!(
            "{name} must be {dim}x{dim}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} has non-finite entries"
        )));
    }
    if !is_symmetric(m, SYMMETRY_TOL) {
        return Err(Error::InvalidParameter(format!("{name} is not symmetric")));
    }
    let ok = if strict {
        is_positive_definite(m)
    } else {
        is_positive_semidefinite(m)
    };
    if !ok {
        let what = if strict { "definite" } else { "semidefinite" };
        return Err(Error::InvalidParameter(format!(
            "{name} is not positive {what}"
        )));
    }
    Ok(())
}

/// `scale * I_n`.
pub fn scaled_identity(n: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::identity(n, n) * scale
}

pub fn to_vector2(v: &DVector<f64>) -> Vector2<f64> {
    Vector2::new(v[0], v[1])
}

pub fn to_matrix2(m: &DMatrix<f64>) -> Matrix2<f64> {
    Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// Ratio of smallest to largest singular value; 0 for a zero matrix.
pub fn conditioning(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    if max <= 0.0 {
        return 0.0;
    }
    sv.min() / max
}

/// Row-major nested-array serde for `DMatrix<f64>`.
pub mod row_major {
    use super::*;

    pub fn serialize<S: Serializer>(
        m: &DMatrix<f64>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<DMatrix<f64>, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }
}

/// Plain-array serde for `DVector<f64>`.
pub mod plain_vector {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &DVector<f64>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<DVector<f64>, D::Error> {
        let data: Vec<f64> = Vec::deserialize(d)?;
        Ok(DVector::from_vec(data))
    }
}

/// Plain-array serde for `Vector2<f64>`.
pub mod plain_vector2 {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &Vector2<f64>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        [v.x, v.y].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vector2<f64>, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(d)?;
        Ok(Vector2::new(x, y))
    }
}
