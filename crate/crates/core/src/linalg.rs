//! Small dense linear-algebra helpers shared by the samplers and the GMM.

use nalgebra::Cholesky;
use nalgebra::Dyn;

use crate::{Error, Matrix, Result};

/// Absolute tolerance, scaled by the largest entry, for symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub fn is_symmetric(a: &Matrix, tol: f64) -> bool {
    if !a.is_square() {
        return false;
    }
    let scale = a.amax().max(1.0);
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[(i, j)] - a[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

/// Validates symmetry, symmetrizes, and factors `a = L Lᵀ`.
pub fn cholesky(a: &Matrix) -> Result<Cholesky<f64, Dyn>> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite("matrix has non-finite entries".into()));
    }
    if !is_symmetric(a, SYMMETRY_TOL) {
        return Err(Error::NotPositiveDefinite("matrix is not symmetric".into()));
    }
    Cholesky::new(symmetrize(a)).ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))
}

/// `ln det(A)` from a Cholesky factor.
pub fn log_det(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Shape("ragged rows".into()));
    }
    Ok(Matrix::from_fn(n, d, |i, j| rows[i][j]))
}

/// Serde adapter storing a matrix as a list of rows.
pub mod rows {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::Matrix;

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        super::to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        super::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub mod vector {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::Vector;

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        Ok(Vector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

/// Stacks matrices with equal column counts vertically.
pub fn vstack(parts: &[&Matrix]) -> Result<Matrix> {
    let cols = match parts.iter().find(|m| m.nrows() > 0) {
        Some(m) => m.ncols(),
        None => return Ok(Matrix::zeros(0, parts.first().map_or(0, |m| m.ncols()))),
    };
    if parts.iter().any(|m| m.nrows() > 0 && m.ncols() != cols) {
        return Err(Error::Shape("vstack column mismatch".into()));
    }
    let total = parts.iter().map(|m| m.nrows()).sum();
    let mut out = Matrix::zeros(total, cols);
    let mut at = 0;
    for m in parts.iter().filter(|m| m.nrows() > 0) {
        out.rows_mut(at, m.nrows()).copy_from(*m);
        at += m.nrows();
    }
    Ok(out)
}

/// Rows of `m` selected by `idx`, in the given order.
pub fn select_rows(m: &Matrix, idx: &[usize]) -> Matrix {
    Matrix::from_fn(idx.len(), m.ncols(), |i, j| m[(idx[i], j)])
}
