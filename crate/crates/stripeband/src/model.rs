//! Model data for u_t = DΔu + Lu + α̌Mu + βB(c)u_x + Q[u,u] + K[u,u,u].

use nalgebra::{ComplexField, Matrix2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};

/// Symmetric 3-tensor, indexed `t[j][k][l]`.
pub type Tensor3 = [[[f64; 2]; 2]; 2];

const SYMMETRY_TOL: f64 = 0.0;

/// Two-component reaction–diffusion–advection system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdModel {
    pub d1: f64,
    pub d2: f64,
    pub l: Matrix2<f64>,
    pub m: Matrix2<f64>,
    /// Component i of `Q[u,v]` is `uᵀ s[i] v`.
    pub s: [Matrix2<f64>; 2],
    /// Component i of `K[u,v,w]` is `Σ t[i][j][k][l] u_j v_k w_l`.
    pub t: [Tensor3; 2],
    pub is_m_identity: bool,
}

/// Unfolding parameters μ = (α, β, κ̃).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Parameters {
    pub alpha: f64,
    pub beta: f64,
    pub kappa_tilde: f64,
}

impl Parameters {
    pub fn new(alpha: f64, beta: f64, kappa_tilde: f64) -> Self {
        Parameters { alpha, beta, kappa_tilde }
    }

    /// α̌ = α / λ_M.
    pub fn alpha_check(&self, lambda_m: f64) -> f64 {
        self.alpha / lambda_m
    }
}

/// B(c) = diag(1 + c, c).
pub fn b_matrix(c: f64) -> Matrix2<f64> {
    Matrix2::new(1.0 + c, 0.0, 0.0, c)
}

fn is_symmetric_tensor(t: &Tensor3) -> bool {
    let perms = |j: usize, k: usize, l: usize| {
        [t[j][k][l], t[j][l][k], t[k][j][l], t[k][l][j], t[l][j][k], t[l][k][j]]
    };
    for j in 0..2 {
        for k in 0..2 {
            for l in 0..2 {
                let p = perms(j, k, l);
                if p.iter().any(|&x| (x - p[0]).abs() > SYMMETRY_TOL) {
                    return false;
                }
            }
        }
    }
    true
}

impl RdModel {
    /// Builds a model, checking finiteness and the symmetry of Q and K.
    pub fn new(
        diffusion: [f64; 2],
        l: Matrix2<f64>,
        m: Matrix2<f64>,
        s: [Matrix2<f64>; 2],
        t: [Tensor3; 2],
    ) -> Result<Self> {
        let all = diffusion
            .iter()
            .chain(l.iter())
            .chain(m.iter())
            .chain(s.iter().flat_map(|x| x.iter()))
            .chain(t.iter().flatten().flatten().flatten());
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("non-finite coefficient".into()));
        }
        for (i, si) in s.iter().enumerate() {
            if (si[(0, 1)] - si[(1, 0)]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidModel(format!("quadratic form S{} is not symmetric", i + 1)));
            }
        }
        for (i, ti) in t.iter().enumerate() {
            if !is_symmetric_tensor(ti) {
                return Err(Error::InvalidModel(format!("cubic tensor T{} is not fully symmetric", i + 1)));
            }
        }
        Ok(RdModel {
            d1: diffusion[0],
            d2: diffusion[1],
            l,
            m,
            s,
            t,
            is_m_identity: m == Matrix2::identity(),
        })
    }

    /// Model without quadratic and cubic terms.
    pub fn linear(diffusion: [f64; 2], l: Matrix2<f64>, m: Matrix2<f64>) -> Result<Self> {
        Self::new(diffusion, l, m, [Matrix2::zeros(); 2], [[[[0.0; 2]; 2]; 2]; 2])
    }

    pub fn diffusion(&self) -> Matrix2<f64> {
        Matrix2::new(self.d1, 0.0, 0.0, self.d2)
    }

    /// a_M: 0 when M is the identity, 1 otherwise.
    pub fn a_m(&self) -> f64 {
        if self.is_m_identity {
            0.0
        } else {
            1.0
        }
    }

    pub fn has_quadratic(&self) -> bool {
        self.s.iter().any(|x| x.iter().any(|&v| v != 0.0))
    }

    pub fn a(&self) -> [f64; 4] {
        [self.l[(0, 0)], self.l[(0, 1)], self.l[(1, 0)], self.l[(1, 1)]]
    }

    /// Q[u,v] over real or complex vectors (no conjugation).
    pub fn quad<T: ComplexField<RealField = f64>>(&self, u: &Vector2<T>, v: &Vector2<T>) -> Vector2<T> {
        let f = |s: &Matrix2<f64>| {
            let mut acc = T::zero();
            for j in 0..2 {
                for k in 0..2 {
                    acc += u[j].clone() * v[k].clone() * T::from_real(s[(j, k)]);
                }
            }
            acc
        };
        Vector2::new(f(&self.s[0]), f(&self.s[1]))
    }

    /// K[u,v,w] over real or complex vectors (no conjugation).
    pub fn cubic<T: ComplexField<RealField = f64>>(
        &self,
        u: &Vector2<T>,
        v: &Vector2<T>,
        w: &Vector2<T>,
    ) -> Vector2<T> {
        let f = |t: &Tensor3| {
            let mut acc = T::zero();
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        acc += u[j].clone() * v[k].clone() * w[l].clone() * T::from_real(t[j][k][l]);
                    }
                }
            }
            acc
        };
        Vector2::new(f(&self.t[0]), f(&self.t[1]))
    }

    /// Matrix of v ↦ Q[u,v].
    pub fn quad_matrix<T: ComplexField<RealField = f64>>(&self, u: &Vector2<T>) -> Matrix2<T> {
        let c0 = self.quad(u, &Vector2::new(T::one(), T::zero()));
        let c1 = self.quad(u, &Vector2::new(T::zero(), T::one()));
        Matrix2::from_columns(&[c0, c1])
    }

    /// Matrix of w ↦ K[u,v,w].
    pub fn cubic_matrix<T: ComplexField<RealField = f64>>(&self, u: &Vector2<T>, v: &Vector2<T>) -> Matrix2<T> {
        let c0 = self.cubic(u, v, &Vector2::new(T::one(), T::zero()));
        let c1 = self.cubic(u, v, &Vector2::new(T::zero(), T::one()));
        Matrix2::from_columns(&[c0, c1])
    }

    /// Copy of the model with Q and K removed.
    pub fn without_nonlinearity(&self) -> Self {
        RdModel { s: [Matrix2::zeros(); 2], t: [[[[0.0; 2]; 2]; 2]; 2], ..self.clone() }
    }
}

/// L u + α̌ M u + Q[u,u] + K[u,u,u].
pub fn eval_reaction(model: &RdModel, u: &Vector2<f64>, alpha_check: f64) -> Vector2<f64> {
    model.l * u + model.m * u * alpha_check + model.quad(u, u) + model.cubic(u, u, u)
}

/// One named validity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

/// Outcome of [`validate_model`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Evaluates every model invariant and records its value.
pub fn validate_model(model: &RdModel) -> ValidationReport {
    let [a1, a2, a3, a4] = model.a();
    let mut checks = Vec::new();
    let mut push = |name: &str, value: f64, passed: bool| {
        checks.push(Check { name: name.to_string(), value, passed })
    };
    push("d1 > 0", model.d1, model.d1 > 0.0);
    push("d2 > 0", model.d2, model.d2 > 0.0);
    let asym_s = model.s.iter().map(|s| (s[(0, 1)] - s[(1, 0)]).abs()).fold(0.0, f64::max);
    push("Q symmetric", asym_s, asym_s == 0.0);
    let sym_t = model.t.iter().all(is_symmetric_tensor);
    push("K symmetric", if sym_t { 0.0 } else { 1.0 }, sym_t);
    let tr = model.l.trace();
    push("trace(L) < 0", tr, tr < 0.0);
    let det = model.l.determinant();
    push("det(L) > 0", det, det > 0.0);
    let w = model.d1 * a4 + model.d2 * a1;
    push("d1*a4 + d2*a1 > 0", w, w > 0.0);
    push("a1*a4 < 0", a1 * a4, a1 * a4 < 0.0);
    push("a2*a3 < a1*a4", a2 * a3 - a1 * a4, a2 * a3 < a1 * a4);
    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn example() -> RdModel {
        let mut t = [[[[0.0; 2]; 2]; 2]; 2];
        for (j, k, l) in [(0, 1, 1), (1, 0, 1), (1, 1, 0)] {
            t[0][j][k][l] = -1.0 / 3.0;
            t[1][j][k][l] = 1.0 / 3.0;
        }
        let s = Matrix2::new(0.5, 0.0, 0.0, 0.125);
        RdModel::new(
            [1.0, 3.5],
            Matrix2::new(3.0, -1.0, 14.0, -3.5),
            Matrix2::new(1.0, 4.0, -0.2, 1.0),
            [s, s],
            t,
        )
        .unwrap()
    }

    #[test]
    fn example_validates() {
        let r = validate_model(&example());
        assert!(r.passed());
        assert_eq!(r.get("trace(L) < 0").unwrap().value, -0.5);
        assert!((r.get("det(L) > 0").unwrap().value - 3.5).abs() < 1e-14);
    }

    #[test]
    fn identity_linear_part_fails_trace() {
        let m = RdModel::linear([1.0, 1.0], Matrix2::identity(), Matrix2::identity()).unwrap();
        let r = validate_model(&m);
        assert!(!r.get("trace(L) < 0").unwrap().passed);
        assert!(!r.passed());
        assert!(m.is_m_identity);
    }

    #[test]
    fn reaction_hand_values() {
        let m = example();
        assert_eq!(eval_reaction(&m, &Vector2::zeros(), 0.7), Vector2::zeros());
        assert_eq!(eval_reaction(&m, &Vector2::new(1.0, 0.0), 0.0), Vector2::new(3.5, 14.5));
        assert_eq!(eval_reaction(&m, &Vector2::new(0.0, 2.0), 0.0), Vector2::new(-1.5, -6.5));
    }

    #[test]
    fn asymmetric_quadratic_rejected() {
        let s = Matrix2::new(1.0, 0.5, 0.0, 1.0);
        let e = RdModel::new([1.0, 1.0], Matrix2::identity(), Matrix2::identity(), [s, Matrix2::zeros()], [[[[0.0; 2]; 2]; 2]; 2]);
        assert!(matches!(e, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn complex_and_real_forms_agree() {
        let m = example();
        let u = Vector2::new(0.3, -1.2);
        let v = Vector2::new(2.0, 0.25);
        let uc = u.map(Complex64::from);
        let vc = v.map(Complex64::from);
        let r = m.quad(&u, &v);
        let c = m.quad(&uc, &vc);
        assert!((c.map(|z| z.re) - r).norm() < 1e-14);
        assert!((m.quad_matrix(&u) * v - r).norm() < 1e-14);
        assert!((m.cubic_matrix(&u, &v) * u - m.cubic(&u, &v, &u)).norm() < 1e-14);
    }

    #[test]
    fn b_matrix_shift() {
        let c = -0.25;
        assert_eq!(b_matrix(c) - b_matrix(0.0), Matrix2::identity() * c);
    }
}
