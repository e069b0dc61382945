//! Small dense solves used by the expansion machinery.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};

const SINGULAR_TOL: f64 = 1e-13;

/// Solves `a x = b` for a 2×2 system, failing when `a` is numerically singular.
pub fn solve2(a: &Matrix2<f64>, b: &Vector2<f64>) -> Result<Vector2<f64>> {
    let det = a.determinant();
    let scale = a.abs().max().powi(2).max(f64::MIN_POSITIVE);
    if det.abs() <= SINGULAR_TOL * scale {
        return Err(Error::DegenerateTuring(format!("singular 2x2 solve (det = {det:e})")));
    }
    let inv = Matrix2::new(a[(1, 1)], -a[(0, 1)], -a[(1, 0)], a[(0, 0)]) / det;
    Ok(inv * b)
}

/// Solves the bordered system `[[a, c], [cᵀ, 0]] (x, s) = (rhs, 0)`.
///
/// Returns `x` with `⟨x, c⟩ = 0` and the multiplier `s`, which vanishes when
/// `rhs` lies in the range of the singular matrix `a`.
pub fn bordered_solve(a: &Matrix2<f64>, rhs: &Vector2<f64>, c: &Vector2<f64>) -> Result<(Vector2<f64>, f64)> {
    let m = Matrix3::new(
        a[(0, 0)], a[(0, 1)], c[0],
        a[(1, 0)], a[(1, 1)], c[1],
        c[0], c[1], 0.0,
    );
    let sol = m
        .lu()
        .solve(&Vector3::new(rhs[0], rhs[1], 0.0))
        .ok_or_else(|| Error::Consistency("bordered system is singular".into()))?;
    Ok((Vector2::new(sol[0], sol[1]), sol[2]))
}
