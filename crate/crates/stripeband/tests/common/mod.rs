#![allow(dead_code)]

use nalgebra::Matrix2;
use rand::Rng;
use stripeband::model::{RdModel, Tensor3};

/// Raw parameters of a Turing-critical model with k_c = `k`.
#[derive(Debug, Clone, Copy)]
pub struct TuringParams {
    pub b1: f64,
    pub b4: f64,
    pub b2: f64,
    pub k: f64,
    pub d1: f64,
    /// Unfolding M = I + m_off·[[0, 1], [−1, 0]] + m_diag·diag(1, −1).
    pub m_off: f64,
    pub m_diag: f64,
}

impl TuringParams {
    /// b1b4 < 0, b1 + b4 < 0 and a stable L; the last also needs
    /// b1 + b4 + k²(d1 + d2) < 0.
    pub fn admissible(&self) -> bool {
        let d2 = -self.d1 * self.b4 / self.b1;
        self.b1 * self.b4 < 0.0 && self.b1 + self.b4 < 0.0 && self.b1 + self.b4 + self.k * self.k * (self.d1 + d2) < 0.0
    }

    pub fn linear_part(&self) -> ([f64; 2], Matrix2<f64>) {
        let TuringParams { b1, b4, b2, k, d1, .. } = *self;
        let d2 = -d1 * b4 / b1;
        let b3 = b1 * b4 / b2;
        let k2 = k * k;
        ([d1, d2], Matrix2::new(b1 + k2 * d1, b2, b3, b4 + k2 * d2))
    }

    pub fn unfolding(&self) -> Matrix2<f64> {
        Matrix2::identity() + Matrix2::new(self.m_diag, self.m_off, -self.m_off, -self.m_diag)
    }
}

/// K[u,u,u] = −|u|²u, so ⟨K[E₀,E₀,E₀],E₀*⟩ = −1.
pub fn stabilizing_cubic() -> [Tensor3; 2] {
    let mut t = [[[[0.0; 2]; 2]; 2]; 2];
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    for (i, ti) in t.iter_mut().enumerate() {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    ti[j][k][l] = -(d(i, j) * d(k, l) + d(i, k) * d(j, l) + d(i, l) * d(j, k)) / 3.0;
                }
            }
        }
    }
    t
}

/// Model with the given linear part, Q = `s` and the stabilizing cubic.
pub fn build_model(p: &TuringParams, s: [Matrix2<f64>; 2]) -> RdModel {
    build_scaled(p, s, 1.0)
}

fn build_scaled(p: &TuringParams, s: [Matrix2<f64>; 2], gamma: f64) -> RdModel {
    let (d, l) = p.linear_part();
    let mut t = stabilizing_cubic();
    t.iter_mut().flatten().flatten().flatten().for_each(|x| *x *= gamma);
    RdModel::new(d, l, p.unfolding(), s, t).expect("generated model is well formed")
}

/// Like `build_model` with the cubic rescaled so that ρ_nl = −1.
pub fn build_supercritical(p: &TuringParams, s: [Matrix2<f64>; 2]) -> RdModel {
    let rho = |g: f64| {
        let m = build_scaled(p, s, g);
        let t = stripeband::turing::analyze_turing(&m).expect("Turing data");
        stripeband::expansion::stripe_expansion(&m, &t).expect("expansion").rho_nl
    };
    // ρ_nl is affine in the cubic strength
    let (r0, r1) = (rho(0.0), rho(1.0));
    build_scaled(p, s, (-1.0 - r0) / (r1 - r0))
}

fn signed<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let x = rng.gen_range(lo..hi);
    if rng.gen_bool(0.5) {
        x
    } else {
        -x
    }
}

/// |λ_M| bounded away from zero.
pub fn nondegenerate(p: &TuringParams) -> bool {
    let (d, l) = p.linear_part();
    let Ok(m) = RdModel::linear(d, l, p.unfolding()) else { return false };
    stripeband::turing::analyze_turing(&m).is_ok_and(|t| t.lambda_m.abs() > 0.05)
}

/// Draws admissible parameters by rejection.
pub fn random_params<R: Rng>(rng: &mut R) -> TuringParams {
    loop {
        let b1 = signed(rng, 0.2, 4.0);
        let b4 = if b1 > 0.0 { -rng.gen_range(b1 * 1.1..b1 * 6.0) } else { rng.gen_range(0.05..(-b1) * 0.9) };
        let p = TuringParams {
            b1,
            b4,
            b2: signed(rng, 0.2, 3.0),
            k: rng.gen_range(0.3..2.5),
            d1: rng.gen_range(0.1..3.0),
            m_off: rng.gen_range(-0.5..0.5),
            m_diag: rng.gen_range(-0.3..0.3),
        };
        if p.admissible() && nondegenerate(&p) {
            return p;
        }
    }
}

/// Small random symmetric quadratic forms.
pub fn random_quadratic<R: Rng>(rng: &mut R, scale: f64) -> [Matrix2<f64>; 2] {
    let mut sym = || {
        let off = rng.gen_range(-scale..scale);
        Matrix2::new(rng.gen_range(-scale..scale), off, off, rng.gen_range(-scale..scale))
    };
    [sym(), sym()]
}

/// Singular 2×2 matrix with b1 ≠ 0 and nonzero trace.
pub fn random_singular<R: Rng>(rng: &mut R) -> Matrix2<f64> {
    loop {
        let b1 = signed(rng, 0.2, 3.0);
        let b4 = signed(rng, 0.2, 3.0);
        let b2 = signed(rng, 0.2, 3.0);
        if (b1 + b4).abs() > 0.3 {
            return Matrix2::new(b1, b2, b1 * b4 / b2, b4);
        }
    }
}
