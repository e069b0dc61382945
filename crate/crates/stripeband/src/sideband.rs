//! Zigzag and Eckhaus curvature coefficients, the leading-order boundaries
//! and region classification.
//!
//! Two coefficient sets are available. `Published` evaluates the closed
//! formulas exactly as stated. `Corrected` adds the O(A²) first-mode
//! corrections of the kernel vectors, the phase coupling of the complex cubic
//! coefficient at β ≠ 0 and the Taylor factor ½ in w_Aββ; it is the set that
//! agrees with the Bloch oracle.

use nalgebra::Vector2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{betabeta_vectors, StripeExpansion};
use crate::linalg::{bordered_solve, solve2};
use crate::model::{b_matrix, Parameters, RdModel};
use crate::turing::TuringData;

/// Dead-band around boundaries used by [`classify_region`].
pub const DEAD_BAND: f64 = 1e-10;

/// Which closed-form coefficient set to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientSet {
    #[default]
    Published,
    Corrected,
}

impl std::str::FromStr for CoefficientSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "published" => Ok(CoefficientSet::Published),
            "corrected" => Ok(CoefficientSet::Corrected),
            other => Err(Error::Config(format!("unknown coefficient set `{other}`"))),
        }
    }
}

/// Curvature coefficients together with the linear data the boundaries need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandCoefficients {
    pub set: CoefficientSet,
    pub rho_alpha: f64,
    pub rho_betabeta: f64,
    pub q22: f64,
    pub rho_kappa: f64,
    pub rho_beta: f64,
    pub rho_nl: f64,
    pub k_c: f64,
    pub lambda_kappabeta: f64,
    pub lambda_beta: f64,
}

fn ip(u: &Vector2<f64>, v: &Vector2<f64>) -> f64 {
    u.dot(v)
}

/// q₂₂ = −k_c²⟨DQ₂,Q₂*⟩.
pub fn q22(model: &RdModel, turing: &TuringData, ex: &StripeExpansion) -> f64 {
    -turing.k_c * turing.k_c * ip(&(model.diffusion() * ex.q2_vec), &ex.q2_star)
}

/// The published zigzag coefficients ρ_α̌, ρ_ββ and q₂₂.
pub fn zigzag_coefficients(model: &RdModel, turing: &TuringData, ex: &StripeExpansion) -> SidebandCoefficients {
    let d = model.diffusion();
    let k2 = turing.k_c * turing.k_c;
    let (e0, es) = (turing.e0, turing.e0_star);
    let q22 = q22(model, turing, ex);
    let rho_alpha = -turing.a_m * k2 * (ip(&(d * e0), &ex.w_alpha_star) + ip(&(d * ex.w_alpha), &es)) / turing.lambda_m
        - q22 / ex.rho_nl;
    let rho_betabeta = -k2
        * (ip(&(d * e0), &ex.w_betabeta_star) + ip(&(d * ex.w_betabeta), &es) - ip(&(d * ex.w_beta), &ex.w_beta_star))
        - q22 * turing.rho_beta / ex.rho_nl;
    SidebandCoefficients {
        set: CoefficientSet::Published,
        rho_alpha,
        rho_betabeta,
        q22,
        rho_kappa: turing.rho_kappa,
        rho_beta: turing.rho_beta,
        rho_nl: ex.rho_nl,
        k_c: turing.k_c,
        lambda_kappabeta: turing.lambda_kappabeta,
        lambda_beta: turing.lambda_beta,
    }
}

/// Terms distinguishing the corrected set from the published one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionTerms {
    /// X = ⟨Dr,E₀*⟩ + ⟨DE₀,r*⟩ from the O(A²) first-mode corrections r, r*.
    pub amplitude_gradient: f64,
    /// I₁ = ⟨Dw_Aβ,E₀*⟩ + ⟨DE₀,w*_Aβ⟩.
    pub i1: f64,
    /// Im ∂_β of the complex cubic coefficient at β = 0.
    pub d_rho_nl_beta: f64,
    /// −k_c² I₁ Im ∂_βρ̃_nl / ρ_nl.
    pub phase_coupling: f64,
    /// Linear part of ρ_ββ with w_Aββ carrying the factor k_c.
    pub linear_betabeta: f64,
    pub r: Vector2<f64>,
    pub r_star: Vector2<f64>,
}

/// Evaluates the correction terms in the frame of `turing`.
pub fn correction_terms(model: &RdModel, turing: &TuringData, ex: &StripeExpansion) -> Result<CorrectionTerms> {
    let core = turing.core();
    let d = model.diffusion();
    let k = turing.k_c;
    let k2 = k * k;
    let (e0, es) = (turing.e0, turing.e0_star);
    let l0 = turing.l_hat0();
    let rho_nl = ex.rho_nl;
    let (q0v, q2v, q2s) = (ex.q0_vec, ex.q2_vec, ex.q2_star);

    let n1 = model.quad(&e0, &q0v) * 2.0 + model.quad(&e0, &q2v) + model.cubic(&e0, &e0, &e0) * 3.0;
    let (r, _) = bordered_solve(&l0, &-(n1 - e0 * n1.dot(&es)), &es)?;
    let n1s = (model.quad_matrix(&q0v) * 2.0 + model.cubic_matrix(&e0, &e0) * 3.0).transpose() * es
        - model.quad_matrix(&q2v).transpose() * es
        + model.quad_matrix(&e0).transpose() * q2s * 2.0;
    let (r_star, _) = bordered_solve(&l0.transpose(), &-(n1s - es * n1s.dot(&e0)), &e0)?;
    let x = ip(&(d * r), &es) + ip(&(d * e0), &r_star);

    let (wb, wbs) = (ex.w_beta, ex.w_beta_star);
    let i1 = ip(&(d * wb), &es) + ip(&(d * e0), &wbs);
    let bm = b_matrix(turing.c);
    let a2 = model.l - d * (4.0 * k2);
    let q2_im = -solve2(&a2, &(model.quad(&e0, &wb) * 4.0 + bm * q2v * (2.0 * k)))?;
    let d_rho = (model.cubic(&e0, &e0, &wb) * 3.0 + model.quad(&wb, &q0v) * 2.0 - model.quad(&wb, &q2v)
        + model.quad(&e0, &q2_im))
    .dot(&es)
        + n1.dot(&wbs);
    let phase_coupling = -k2 * i1 * d_rho / rho_nl;

    let (wbb, wbbs) = betabeta_vectors(&core, turing.c, &wb, &wbs, 1.0)?;
    let linear_betabeta = -k2 * (ip(&(d * e0), &wbbs) + ip(&(d * wbb), &es) - ip(&(d * wb), &wbs));

    Ok(CorrectionTerms {
        amplitude_gradient: x,
        i1,
        d_rho_nl_beta: d_rho,
        phase_coupling,
        linear_betabeta,
        r,
        r_star,
    })
}

/// The oracle-validated coefficient set.
pub fn corrected_coefficients(model: &RdModel, turing: &TuringData, ex: &StripeExpansion) -> Result<SidebandCoefficients> {
    let p = zigzag_coefficients(model, turing, ex);
    let t = correction_terms(model, turing, ex)?;
    let k2 = turing.k_c * turing.k_c;
    let x = t.amplitude_gradient;
    Ok(SidebandCoefficients {
        set: CoefficientSet::Corrected,
        rho_alpha: p.rho_alpha + k2 * x / ex.rho_nl,
        rho_betabeta: t.linear_betabeta - (p.q22 - k2 * x) * turing.rho_beta / ex.rho_nl + t.phase_coupling,
        ..p
    })
}

/// Coefficients of the requested set.
pub fn sideband_coefficients(
    model: &RdModel,
    turing: &TuringData,
    ex: &StripeExpansion,
    set: CoefficientSet,
) -> Result<SidebandCoefficients> {
    match set {
        CoefficientSet::Published => Ok(zigzag_coefficients(model, turing, ex)),
        CoefficientSet::Corrected => corrected_coefficients(model, turing, ex),
    }
}

/// ρ_ββ = k_c⁴b3²d1·b4(5b1+b4)/(b1²(b1+b4)⁴), stated for Q = 0.
pub fn rho_betabeta_closed_form(model: &RdModel, turing: &TuringData) -> Result<f64> {
    if model.has_quadratic() {
        return Err(Error::Precondition("closed form requires Q = 0".into()));
    }
    Ok(closed_form_value(turing.k_c, model.d1, turing.b))
}

fn closed_form_value(k: f64, d1: f64, b: [f64; 4]) -> f64 {
    let [b1, _, b3, b4] = b;
    let s = b1 + b4;
    k.powi(4) * b3 * b3 * d1 * b4 * (5.0 * b1 + b4) / (b1 * b1 * s.powi(4))
}

/// Sign of ρ_ββ predicted from a1: negative for a1 < 0, or for a1 > 0 with
/// a1 > k_c²d1 − (a4 − k_c²d2)/5; positive otherwise.
pub fn rho_betabeta_sign_prediction(model: &RdModel, turing: &TuringData) -> i8 {
    let [a1, _, _, a4] = model.a();
    let k2 = turing.k_c * turing.k_c;
    if a1 < 0.0 || (a1 > 0.0 && a1 > k2 * model.d1 - (a4 - k2 * model.d2) / 5.0) {
        -1
    } else {
        1
    }
}

/// Leading-order boundaries at one (κ̃, β).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Boundaries {
    pub kappa_tilde: f64,
    pub beta: f64,
    pub alpha_bif: f64,
    pub alpha_eckhaus: f64,
    /// `None` when ρ_α̌ = 0; the boundary is then the vertical line `zigzag_kappa`.
    pub alpha_zigzag: Option<f64>,
    pub zigzag_kappa: Option<f64>,
    /// Values of α̃ = α + ρ_β β².
    pub shifted_bif: f64,
    pub shifted_eckhaus: f64,
    pub shifted_zigzag: Option<f64>,
}

pub fn boundaries(sb: &SidebandCoefficients, kappa_tilde: f64, beta: f64) -> Boundaries {
    let (rk, rb) = (sb.rho_kappa, sb.rho_beta);
    let kk = kappa_tilde * kappa_tilde;
    let bb = beta * beta;
    let alpha_bif = -(rk * kk + rb * bb);
    let alpha_eckhaus = -3.0 * rk * kk - rb * bb;
    let (alpha_zigzag, zigzag_kappa, shifted_zigzag) = if sb.rho_alpha != 0.0 {
        let z = -(sb.k_c * rk * kappa_tilde + sb.rho_betabeta * bb) / sb.rho_alpha;
        let zt = -(sb.k_c * rk * kappa_tilde + (sb.rho_betabeta - sb.rho_alpha * rb) * bb) / sb.rho_alpha;
        (Some(z), None, Some(zt))
    } else {
        (None, Some(-sb.rho_betabeta * bb / (sb.k_c * rk)), None)
    };
    Boundaries {
        kappa_tilde,
        beta,
        alpha_bif,
        alpha_eckhaus,
        alpha_zigzag,
        zigzag_kappa,
        shifted_bif: -rk * kk,
        shifted_eckhaus: -3.0 * rk * kk,
        shifted_zigzag,
    }
}

fn squared_amplitude(sb: &SidebandCoefficients, mu: &Parameters) -> f64 {
    let g = mu.alpha + sb.rho_beta * mu.beta * mu.beta + sb.rho_kappa * mu.kappa_tilde * mu.kappa_tilde;
    -g / sb.rho_nl
}

/// k_cρ_κ̃κ̃ + ρ_α̌α + ρ_ββ β², the ℓ² coefficient of the zigzag eigenvalue.
pub fn zigzag_curvature(sb: &SidebandCoefficients, mu: &Parameters) -> Result<f64> {
    if !(squared_amplitude(sb, mu) > 0.0) {
        return Err(Error::NoStripe);
    }
    Ok(sb.k_c * sb.rho_kappa * mu.kappa_tilde + sb.rho_alpha * mu.alpha + sb.rho_betabeta * mu.beta * mu.beta)
}

/// Leading-order Eckhaus eigenvalue at Bloch wavenumber γ.
pub fn eckhaus_spectrum(sb: &SidebandCoefficients, mu: &Parameters, gamma: f64) -> Result<Complex64> {
    let a2 = squared_amplitude(sb, mu);
    if !(a2 > 0.0) {
        return Err(Error::NoStripe);
    }
    let k = sb.k_c;
    let im = k * (sb.lambda_kappabeta - sb.lambda_beta) * mu.beta * gamma;
    let kt = mu.kappa_tilde;
    let num = mu.alpha + sb.rho_beta * mu.beta * mu.beta + 3.0 * sb.rho_kappa * kt * kt;
    let re = -k * k * (sb.rho_kappa / sb.rho_nl) / a2 * num * gamma * gamma;
    Ok(Complex64::new(re, im))
}

/// Real γ² coefficient of the Eckhaus eigenvalue.
pub fn eckhaus_curvature(sb: &SidebandCoefficients, mu: &Parameters) -> Result<f64> {
    Ok(eckhaus_spectrum(sb, mu, 1.0)?.re)
}

/// Imaginary γ coefficient of the Eckhaus eigenvalue, k_c(λ_κ̃β − λ_β)β.
pub fn eckhaus_drift(sb: &SidebandCoefficients, beta: f64) -> f64 {
    sb.k_c * (sb.lambda_kappabeta - sb.lambda_beta) * beta
}

/// Stability label of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionLabel {
    NoStripes,
    Stable,
    EckhausUnstable,
    ZigzagUnstable,
    BothUnstable,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::NoStripes => "no-stripes",
            RegionLabel::Stable => "stable",
            RegionLabel::EckhausUnstable => "eckhaus-unstable",
            RegionLabel::ZigzagUnstable => "zigzag-unstable",
            RegionLabel::BothUnstable => "both-unstable",
        }
    }

    /// Combines the two instability flags.
    pub fn from_flags(eckhaus: bool, zigzag: bool) -> Self {
        match (eckhaus, zigzag) {
            (false, false) => RegionLabel::Stable,
            (true, false) => RegionLabel::EckhausUnstable,
            (false, true) => RegionLabel::ZigzagUnstable,
            (true, true) => RegionLabel::BothUnstable,
        }
    }
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies μ by stripe existence and the signs of both curvatures.
pub fn classify_region(sb: &SidebandCoefficients, mu: &Parameters) -> RegionLabel {
    let b = boundaries(sb, mu.kappa_tilde, mu.beta);
    if !(mu.alpha - b.alpha_bif > DEAD_BAND) {
        return RegionLabel::NoStripes;
    }
    let zz = zigzag_curvature(sb, mu).map(|z| z > DEAD_BAND).unwrap_or(false);
    let eh = eckhaus_curvature(sb, mu).map(|e| e > DEAD_BAND).unwrap_or(false);
    RegionLabel::from_flags(eh, zz)
}

/// Zigzag-boundary configurations near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZigzagScenario {
    /// β = 0, ρ_α̌ < 0
    I,
    /// β = 0, ρ_α̌ = 0
    II,
    /// β = 0, ρ_α̌ > 0
    III,
    /// Z(0,β) > 0
    S1,
    /// Z(0,β) = 0
    S2,
    /// B(0,β) < Z(0,β) < 0
    S3,
    /// Z(0,β) = B(0,β)
    S4,
    /// Z(0,β) < B(0,β)
    S5,
    /// ρ_α̌ = 0 with β ≠ 0: vertical boundary, by the sign of ρ_ββ.
    VerticalNegative,
    VerticalZero,
    VerticalPositive,
}

impl ZigzagScenario {
    pub fn tag(&self) -> &'static str {
        match self {
            ZigzagScenario::I => "(i)",
            ZigzagScenario::II => "(ii)",
            ZigzagScenario::III => "(iii)",
            ZigzagScenario::S1 => "(1)",
            ZigzagScenario::S2 => "(2)",
            ZigzagScenario::S3 => "(3)",
            ZigzagScenario::S4 => "(4)",
            ZigzagScenario::S5 => "(5)",
            ZigzagScenario::VerticalNegative => "(A)",
            ZigzagScenario::VerticalZero => "(B)",
            ZigzagScenario::VerticalPositive => "(C)",
        }
    }
}

fn cmp_eps(x: f64, y: f64) -> std::cmp::Ordering {
    let scale = x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
    if (x - y).abs() <= DEAD_BAND * scale.max(1e-300) {
        std::cmp::Ordering::Equal
    } else if x < y {
        std::cmp::Ordering::Less
    } else {
        std::cmp::Ordering::Greater
    }
}

/// Locates Z(0,β) relative to 0 and B(0,β) through the ratio ρ_ββ/ρ_α̌.
pub fn zigzag_scenario(sb: &SidebandCoefficients, beta: f64) -> ZigzagScenario {
    use std::cmp::Ordering::*;
    let ra = sb.rho_alpha;
    let ra_zero = ra.abs() <= DEAD_BAND * sb.rho_betabeta.abs().max(1.0);
    if beta == 0.0 {
        return if ra_zero {
            ZigzagScenario::II
        } else if ra < 0.0 {
            ZigzagScenario::I
        } else {
            ZigzagScenario::III
        };
    }
    if ra_zero {
        return match cmp_eps(sb.rho_betabeta, 0.0) {
            Less => ZigzagScenario::VerticalNegative,
            Equal => ZigzagScenario::VerticalZero,
            Greater => ZigzagScenario::VerticalPositive,
        };
    }
    // Z(0,β) = −(ρ_ββ/ρ_α̌)β² and B(0,β) = −ρ_β β²
    let r = sb.rho_betabeta / ra;
    match (cmp_eps(r, 0.0), cmp_eps(r, sb.rho_beta)) {
        (Less, _) => ZigzagScenario::S1,
        (Equal, _) => ZigzagScenario::S2,
        (Greater, Less) => ZigzagScenario::S3,
        (Greater, Equal) => ZigzagScenario::S4,
        (Greater, Greater) => ZigzagScenario::S5,
    }
}

/// One point of an analytic region map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapPoint {
    pub kappa_tilde: f64,
    pub alpha: f64,
    pub label: RegionLabel,
}

/// Labels every (κ̃, α) on the grid at fixed β; rows run over α, columns over κ̃.
pub fn analytic_map(sb: &SidebandCoefficients, alpha_grid: &[f64], kappa_grid: &[f64], beta: f64) -> Vec<MapPoint> {
    alpha_grid
        .par_iter()
        .flat_map_iter(|&alpha| {
            kappa_grid.iter().map(move |&kappa_tilde| MapPoint {
                kappa_tilde,
                alpha,
                label: classify_region(sb, &Parameters::new(alpha, beta, kappa_tilde)),
            })
        })
        .collect()
}
