//! Built-in reference models.

use nalgebra::Matrix2;

use crate::model::{RdModel, Tensor3};

/// Cubic tensors of K[u,u,u] = (−uv², uv²).
pub fn minus_uv2_tensors() -> [Tensor3; 2] {
    let mut t = [[[[0.0; 2]; 2]; 2]; 2];
    for (j, k, l) in [(0, 1, 1), (1, 0, 1), (1, 1, 0)] {
        t[0][j][k][l] = -1.0 / 3.0;
        t[1][j][k][l] = 1.0 / 3.0;
    }
    t
}

/// The exactly solvable example: D = diag(1, 7/2), L = [[3, −1], [14, −7/2]],
/// M = [[1, 4], [−1/5, 1]], Q = (u²/2 + v²/8)(1, 1) and K = (−uv², uv²).
pub fn example_model() -> RdModel {
    let s = Matrix2::new(0.5, 0.0, 0.0, 0.125);
    RdModel::new(
        [1.0, 3.5],
        Matrix2::new(3.0, -1.0, 14.0, -3.5),
        Matrix2::new(1.0, 4.0, -0.2, 1.0),
        [s, s],
        minus_uv2_tensors(),
    )
    .expect("example model is well formed")
}
