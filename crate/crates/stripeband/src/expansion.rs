//! Lyapunov–Schmidt quantities: correction vectors, quadratic vectors, the
//! cubic coefficient, and the resulting stripe amplitude, speed and profile.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{bordered_solve, solve2};
use crate::model::{b_matrix, Parameters, RdModel};
use crate::turing::{TuringCore, TuringData};

/// Factor multiplying k_c in the right-hand side of the w_Aββ systems, as published.
pub const BETABETA_FACTOR: f64 = 2.0;

const ORTHOGONALITY_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-9;

/// The four correction vectors and their adjoint counterparts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionVectors {
    pub w_alpha: Vector2<f64>,
    pub w_beta: Vector2<f64>,
    pub w_kappa: Vector2<f64>,
    pub w_betabeta: Vector2<f64>,
    pub w_alpha_star: Vector2<f64>,
    pub w_beta_star: Vector2<f64>,
    pub w_kappa_star: Vector2<f64>,
    pub w_betabeta_star: Vector2<f64>,
    /// Largest relative residual over the eight bordered systems.
    pub max_residual: f64,
    /// Largest |⟨w, E₀*⟩|/(|w||E₀*|) or the adjoint analogue.
    pub max_constraint: f64,
}

struct Solver<'a> {
    core: &'a TuringCore,
    max_residual: f64,
    max_constraint: f64,
}

impl Solver<'_> {
    fn solve(&mut self, name: &str, adjoint: bool, rhs: Vector2<f64>) -> Result<Vector2<f64>> {
        self.solve_with_scale(name, adjoint, rhs, 0.0)
    }

    /// `reference` is the size of the terms that cancel into `rhs`.
    fn solve_with_scale(&mut self, name: &str, adjoint: bool, rhs: Vector2<f64>, reference: f64) -> Result<Vector2<f64>> {
        let l0 = self.core.l_hat0();
        let (a, constraint) = if adjoint { (l0.transpose(), self.core.e0) } else { (l0, self.core.e0_star) };
        // the range of `a` is orthogonal to the kernel of its transpose
        let left_null = if adjoint { self.core.e0 } else { self.core.e0_star };
        let proj = rhs.dot(&left_null);
        if proj.abs() > ORTHOGONALITY_TOL * rhs.norm().max(reference) * left_null.norm() && proj.abs() > 1e-300 {
            return Err(Error::Consistency(format!(
                "right-hand side of {name} is not in the range (projection {proj:e})"
            )));
        }
        let (w, _) = bordered_solve(&a, &rhs, &constraint)?;
        let scale = (a.abs().max() * w.norm()).max(rhs.norm()).max(reference).max(f64::MIN_POSITIVE);
        let res = (a * w - rhs).norm() / scale;
        if res > RESIDUAL_TOL {
            return Err(Error::Consistency(format!("{name} residual {res:e}")));
        }
        self.max_residual = self.max_residual.max(res);
        let denom = (w.norm() * constraint.norm()).max(f64::MIN_POSITIVE);
        self.max_constraint = self.max_constraint.max(w.dot(&constraint).abs() / denom);
        Ok(w)
    }
}

/// w_Aββ and w*_Aββ with an explicit factor in front of k_c.
pub fn betabeta_vectors(
    core: &TuringCore,
    c: f64,
    w_beta: &Vector2<f64>,
    w_beta_star: &Vector2<f64>,
    factor: f64,
) -> Result<(Vector2<f64>, Vector2<f64>)> {
    let mut s = Solver { core, max_residual: 0.0, max_constraint: 0.0 };
    let bm = b_matrix(c);
    let (e0, es) = (core.e0, core.e0_star);
    let k = core.k_c;
    let bw = bm * w_beta;
    let w = s.solve("w_Abetabeta", false, (bw - e0 * bw.dot(&es)) * (factor * k))?;
    let bws = bm * w_beta_star;
    let ws = s.solve("w*_Abetabeta", true, (bws - es * bws.dot(&e0)) * (factor * k))?;
    Ok((w, ws))
}

/// Solves the eight bordered systems in the frame `c`.
pub fn correction_vectors(model: &RdModel, core: &TuringCore, lambda_m: f64, c: f64) -> Result<CorrectionVectors> {
    let mut s = Solver { core, max_residual: 0.0, max_constraint: 0.0 };
    let (e0, es) = (core.e0, core.e0_star);
    let k = core.k_c;
    let d = model.diffusion();
    let m = model.m;
    let bm = b_matrix(c);
    let id = Matrix2::identity();
    let b_e = (bm * e0).dot(&es);

    let m_scale = lambda_m.abs() + m.norm();
    let w_alpha = s.solve_with_scale("w_Aalpha", false, (id * lambda_m - m) * e0, m_scale * e0.norm())?;
    let w_beta = s.solve("w_Abeta", false, (id * b_e - bm) * e0 * k)?;
    let w_kappa = s.solve("w_Akappa", false, d * e0 * (2.0 * k))?;
    let bw = bm * w_beta;
    let w_betabeta = s.solve("w_Abetabeta", false, (bw - e0 * bw.dot(&es)) * (BETABETA_FACTOR * k))?;

    let w_alpha_star = s.solve_with_scale("w*_Aalpha", true, (id * lambda_m - m.transpose()) * es, m_scale * es.norm())?;
    let w_beta_star = s.solve("w*_Abeta", true, (id * b_e - bm) * es * k)?;
    let w_kappa_star = s.solve("w*_Akappa", true, d * es * (2.0 * k))?;
    let bws = bm * w_beta_star;
    let w_betabeta_star = s.solve("w*_Abetabeta", true, (bws - es * bws.dot(&e0)) * (BETABETA_FACTOR * k))?;

    Ok(CorrectionVectors {
        w_alpha,
        w_beta,
        w_kappa,
        w_betabeta,
        w_alpha_star,
        w_beta_star,
        w_kappa_star,
        w_betabeta_star,
        max_residual: s.max_residual,
        max_constraint: s.max_constraint,
    })
}

/// Q₀, Q₂ and the adjoint Q₂*.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticVectors {
    pub q0: Vector2<f64>,
    pub q2: Vector2<f64>,
    pub q2_star: Vector2<f64>,
}

/// Q₀ = −2L⁻¹Q[E₀,E₀], Q₂ = −2(−4k_c²D+L)⁻¹Q[E₀,E₀],
/// Q₂* = −2(−4k_c²D+Lᵀ)⁻¹ J(E₀)ᵀE₀* with J(E₀)v = Q[E₀,v].
pub fn quadratic_vectors(model: &RdModel, core: &TuringCore) -> Result<QuadraticVectors> {
    let e0 = core.e0;
    let qee = model.quad(&e0, &e0);
    let a2 = model.l - model.diffusion() * (4.0 * core.k_c * core.k_c);
    let q0 = solve2(&model.l, &qee)? * -2.0;
    let q2 = solve2(&a2, &qee)? * -2.0;
    let j = model.quad_matrix(&e0);
    let q2_star = solve2(&a2.transpose(), &(j.transpose() * core.e0_star))? * -2.0;
    Ok(QuadraticVectors { q0, q2, q2_star })
}

/// The cubic coefficient of the bifurcation equation and its pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonlinearCoefficients {
    pub q0: f64,
    pub q2: f64,
    pub k0: f64,
    pub rho_nl: f64,
    pub supercritical: bool,
}

/// ρ_nl = 3k₀ + 2q₀ + q₂.
pub fn nonlinear_coefficient(model: &RdModel, core: &TuringCore, qv: &QuadraticVectors) -> NonlinearCoefficients {
    let (e0, es) = (core.e0, core.e0_star);
    let q0 = model.quad(&e0, &qv.q0).dot(&es);
    let q2 = model.quad(&e0, &qv.q2).dot(&es);
    let k0 = model.cubic(&e0, &e0, &e0).dot(&es);
    let rho_nl = 3.0 * k0 + 2.0 * q0 + q2;
    NonlinearCoefficients { q0, q2, k0, rho_nl, supercritical: rho_nl < 0.0 }
}

/// Everything the stripe expansion needs beyond the linear coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StripeExpansion {
    pub q0_vec: Vector2<f64>,
    pub q2_vec: Vector2<f64>,
    pub q2_star: Vector2<f64>,
    pub q0: f64,
    pub q2: f64,
    pub k0: f64,
    pub rho_nl: f64,
    pub w_alpha: Vector2<f64>,
    pub w_beta: Vector2<f64>,
    pub w_kappa: Vector2<f64>,
    pub w_betabeta: Vector2<f64>,
    pub w_alpha_star: Vector2<f64>,
    pub w_beta_star: Vector2<f64>,
    pub w_kappa_star: Vector2<f64>,
    pub w_betabeta_star: Vector2<f64>,
    pub max_residual: f64,
    pub max_constraint: f64,
}

impl StripeExpansion {
    pub fn supercritical(&self) -> bool {
        self.rho_nl < 0.0
    }
}

/// Builds the expansion in the frame of `turing`.
pub fn stripe_expansion(model: &RdModel, turing: &TuringData) -> Result<StripeExpansion> {
    let core = turing.core();
    let w = correction_vectors(model, &core, turing.lambda_m, turing.c)?;
    let qv = quadratic_vectors(model, &core)?;
    let nl = nonlinear_coefficient(model, &core, &qv);
    Ok(StripeExpansion {
        q0_vec: qv.q0,
        q2_vec: qv.q2,
        q2_star: qv.q2_star,
        q0: nl.q0,
        q2: nl.q2,
        k0: nl.k0,
        rho_nl: nl.rho_nl,
        w_alpha: w.w_alpha,
        w_beta: w.w_beta,
        w_kappa: w.w_kappa,
        w_betabeta: w.w_betabeta,
        w_alpha_star: w.w_alpha_star,
        w_beta_star: w.w_beta_star,
        w_kappa_star: w.w_kappa_star,
        w_betabeta_star: w.w_betabeta_star,
        max_residual: w.max_residual,
        max_constraint: w.max_constraint,
    })
}

/// Re λ̃ = α + ρ_β β² + ρ_κ̃ κ̃², the distance above the bifurcation surface.
pub fn growth_rate(turing: &TuringData, mu: &Parameters) -> f64 {
    mu.alpha + turing.rho_beta * mu.beta * mu.beta + turing.rho_kappa * mu.kappa_tilde * mu.kappa_tilde
}

/// Leading-order amplitude, or `None` below the bifurcation surface.
pub fn amplitude(turing: &TuringData, expansion: &StripeExpansion, mu: &Parameters) -> Result<Option<f64>> {
    if !(expansion.rho_nl < 0.0) {
        return Err(Error::UnsupportedBranch(expansion.rho_nl));
    }
    let rad = -growth_rate(turing, mu) / expansion.rho_nl;
    Ok(if rad >= 0.0 { Some(rad.sqrt()) } else { None })
}

/// Leading-order speed parameter c; the stripe velocity is βc.
pub fn velocity(turing: &TuringData, mu: &Parameters) -> f64 {
    let k = turing.k_c;
    -turing.lambda_beta
        - turing.lambda_mbeta / k * turing.a_m * mu.alpha
        - (turing.lambda_kappabeta - turing.lambda_beta) / k * mu.kappa_tilde
}

/// Fourier modes of the leading-order profile:
/// U(x) = mode0 + 2 Re(mode1 e^{ix}) + 2 Re(mode2 e^{2ix}).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileModes {
    pub amplitude: f64,
    pub mode0: Vector2<f64>,
    pub mode1: Vector2<Complex64>,
    pub mode2: Vector2<f64>,
}

/// Fourier modes of the leading-order stripe, or `None` when no stripe exists.
pub fn profile_modes(turing: &TuringData, ex: &StripeExpansion, mu: &Parameters) -> Result<Option<ProfileModes>> {
    let Some(a) = amplitude(turing, ex, mu)? else {
        return Ok(None);
    };
    let ac = mu.alpha_check(turing.lambda_m);
    let b = mu.beta;
    let re = turing.e0 + ex.w_kappa * mu.kappa_tilde + ex.w_alpha * ac + ex.w_betabeta * (b * b);
    let im = ex.w_beta * b;
    Ok(Some(ProfileModes {
        amplitude: a,
        mode0: ex.q0_vec * (a * a),
        mode1: Vector2::new(Complex64::new(re[0], im[0]), Complex64::new(re[1], im[1])) * Complex64::new(a, 0.0),
        mode2: ex.q2_vec * (0.5 * a * a),
    }))
}

/// Samples the leading-order stripe profile at the given x (rescaled period 2π).
pub fn stripe_profile(
    turing: &TuringData,
    ex: &StripeExpansion,
    mu: &Parameters,
    xs: &[f64],
) -> Result<Option<Vec<Vector2<f64>>>> {
    let Some(p) = profile_modes(turing, ex, mu)? else {
        return Ok(None);
    };
    Ok(Some(
        xs.iter()
            .map(|&x| {
                let e1 = Complex64::new(x.cos(), x.sin());
                let m1 = p.mode1.map(|z| 2.0 * (z * e1).re);
                p.mode0 + m1 + p.mode2 * (2.0 * (2.0 * x).cos())
            })
            .collect(),
    ))
}

/// Amplitude and speed of the stripe at μ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripeState {
    pub mu: Parameters,
    pub amplitude: f64,
    pub c: f64,
}

pub fn stripe_state(turing: &TuringData, ex: &StripeExpansion, mu: &Parameters) -> Result<Option<StripeState>> {
    Ok(amplitude(turing, ex, mu)?.map(|a| StripeState { mu: *mu, amplitude: a, c: velocity(turing, mu) }))
}

/// Direction of stripe motion relative to β.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MotionDirection {
    /// −sgn(a1).
    pub sign: i8,
    pub degenerate: bool,
    /// Whether sgn(c) at μ = 0 agrees with `sign`.
    pub agrees_with_velocity: bool,
}

pub fn motion_direction(model: &RdModel, turing: &TuringData) -> MotionDirection {
    let a1 = model.l[(0, 0)];
    let sign = if a1 > 0.0 {
        -1
    } else if a1 < 0.0 {
        1
    } else {
        0
    };
    let c = velocity(turing, &Parameters::default());
    let sc = if c > 0.0 {
        1
    } else if c < 0.0 {
        -1
    } else {
        0
    };
    MotionDirection { sign, degenerate: sign == 0, agrees_with_velocity: sc == sign }
}
