//! Turing point analysis: critical wavenumber, kernel vectors, the dispersion
//! relation and every linear coefficient of the critical eigenvalue.
//!
//! Each coefficient is computed from exact derivatives of the dispersion
//! relation and again from inner products with the correction vectors. Both
//! values are kept together with their discrepancy.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{correction_vectors, CorrectionVectors};
use crate::jet::Jet;
use crate::model::{b_matrix, Parameters, RdModel};

/// Below this |λ_M| the unfolding is treated as degenerate.
pub const LAMBDA_M_TOL: f64 = 1e-8;
/// Relative tolerance of the dual-route cross-checks.
pub const CROSS_CHECK_REL_TOL: f64 = 1e-8;
/// Absolute floor of the cross-checks, for coefficients that vanish.
pub const CROSS_CHECK_ABS_TOL: f64 = 1e-11;

// jet variable slots
const LAMBDA: usize = 0;
const K: usize = 1;
const ELL: usize = 2;
const ALPHA: usize = 3;
const BETA: usize = 4;

fn cx(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Critical wavenumber and normalized kernel vectors of L̂₀ = −k_c²D + L.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuringCore {
    pub k_c: f64,
    pub e0: Vector2<f64>,
    pub e0_star: Vector2<f64>,
    pub c0: f64,
    pub c0_star: f64,
    /// Entries b1..b4 of L̂₀, row major.
    pub b: [f64; 4],
}

impl TuringCore {
    pub fn l_hat0(&self) -> Matrix2<f64> {
        Matrix2::new(self.b[0], self.b[1], self.b[2], self.b[3])
    }
}

/// k_c = sqrt((d1·a4 + d2·a1)/(2·d1·d2)).
pub fn critical_wavenumber(model: &RdModel) -> Result<f64> {
    let [a1, _, _, a4] = model.a();
    let num = model.d1 * a4 + model.d2 * a1;
    let den = 2.0 * model.d1 * model.d2;
    if !(num > 0.0) || !(den > 0.0) {
        return Err(Error::NotTuring(format!(
            "radicand (d1*a4 + d2*a1)/(2*d1*d2) = {} is not positive",
            num / den
        )));
    }
    Ok((num / den).sqrt())
}

/// E₀ = (b2, −b1)/c₀ and E₀* = (b3, −b1)/c₀*, normalized so that
/// ⟨E₀,E₀⟩ = ⟨E₀,E₀*⟩ = 1.
pub fn kernel_vectors(model: &RdModel, k_c: f64) -> Result<TuringCore> {
    let l0 = model.l - model.diffusion() * (k_c * k_c);
    let b = [l0[(0, 0)], l0[(0, 1)], l0[(1, 0)], l0[(1, 1)]];
    let [b1, b2, b3, b4] = b;
    let scale = l0.abs().max().max(f64::MIN_POSITIVE);
    if b1 == 0.0 {
        return Err(Error::DegenerateNormalization("b1 = 0".into()));
    }
    let det = b1 * b4 - b2 * b3;
    if det.abs() > 1e-10 * scale * scale {
        return Err(Error::NotTuring(format!("det(-k_c^2 D + L) = {det:e} is not zero")));
    }
    let c0 = b2.hypot(b1);
    let c0_star = (b2 * b3 + b1 * b1) / c0;
    if c0_star == 0.0 {
        return Err(Error::DegenerateNormalization("c0* = 0".into()));
    }
    Ok(TuringCore {
        k_c,
        e0: Vector2::new(b2, -b1) / c0,
        e0_star: Vector2::new(b3, -b1) / c0_star,
        c0,
        c0_star,
        b,
    })
}

/// Critical wavenumber and kernel vectors in one call.
pub fn turing_core(model: &RdModel) -> Result<TuringCore> {
    kernel_vectors(model, critical_wavenumber(model)?)
}

/// L̂(k,ℓ) = −(k²+ℓ²)D + L + α̌M + ikβB(c).
pub fn linear_operator(model: &RdModel, k: f64, ell: f64, alpha_check: f64, beta: f64, c: f64) -> Matrix2<Complex64> {
    let real = model.l - model.diffusion() * (k * k + ell * ell) + model.m * alpha_check;
    let adv = b_matrix(c) * (k * beta);
    Matrix2::from_fn(|i, j| Complex64::new(real[(i, j)], adv[(i, j)]))
}

/// d(λ,k,ℓ) = det(L̂(k,ℓ) − λ Id).
pub fn dispersion(model: &RdModel, lambda: Complex64, k: f64, ell: f64, alpha_check: f64, beta: f64, c: f64) -> Complex64 {
    let p = linear_operator(model, k, ell, alpha_check, beta, c);
    (p[(0, 0)] - lambda) * (p[(1, 1)] - lambda) - p[(0, 1)] * p[(1, 0)]
}

/// The dispersion relation as a jet in (λ, k, ℓ, α̌, β).
pub fn dispersion_jet(model: &RdModel, lambda: Complex64, k: f64, ell: f64, alpha_check: f64, beta: f64, c: f64) -> Jet {
    let lam = Jet::variable(LAMBDA, lambda);
    let kj = Jet::variable(K, cx(k));
    let lj = Jet::variable(ELL, cx(ell));
    let aj = Jet::variable(ALPHA, cx(alpha_check));
    let bj = Jet::variable(BETA, cx(beta));
    let [a1, a2, a3, a4] = model.a();
    let m = &model.m;
    let lap = kj * kj + lj * lj;
    let i = Complex64::i();
    let p11 = Jet::real(a1) - lap.scale(cx(model.d1)) + aj.scale(cx(m[(0, 0)])) + (kj * bj).scale(i * (1.0 + c));
    let p22 = Jet::real(a4) - lap.scale(cx(model.d2)) + aj.scale(cx(m[(1, 1)])) + (kj * bj).scale(i * c);
    let p12 = Jet::real(a2) + aj.scale(cx(m[(0, 1)]));
    let p21 = Jet::real(a3) + aj.scale(cx(m[(1, 0)]));
    (p11 - lam) * (p22 - lam) - p12 * p21
}

/// Both eigenvalues of a complex 2×2 matrix, the small one computed without cancellation.
pub fn eigenvalues2(m: &Matrix2<Complex64>) -> [Complex64; 2] {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let half = tr * 0.5;
    let disc = (half * half - det).sqrt();
    let big = if (half + disc).norm() >= (half - disc).norm() { half + disc } else { half - disc };
    if big.norm() == 0.0 {
        return [big, big];
    }
    [big, det / big]
}

/// Derivatives of a simple root λ of the dispersion relation with respect to
/// (k, ℓ, α̌, β), by implicit differentiation of d(λ(x), x) = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenDerivatives {
    pub lambda: Complex64,
    pub grad: [Complex64; 4],
    pub hess: [[Complex64; 4]; 4],
}

pub const D_K: usize = 0;
pub const D_ELL: usize = 1;
pub const D_ALPHA: usize = 2;
pub const D_BETA: usize = 3;

/// Root nearest `guess` of d(·,k,ℓ) and its first and second derivatives.
pub fn eigen_derivatives(
    model: &RdModel,
    guess: Complex64,
    k: f64,
    ell: f64,
    alpha_check: f64,
    beta: f64,
    c: f64,
) -> Result<EigenDerivatives> {
    let ev = eigenvalues2(&linear_operator(model, k, ell, alpha_check, beta, c));
    let lambda = if (ev[0] - guess).norm() <= (ev[1] - guess).norm() { ev[0] } else { ev[1] };
    let d = dispersion_jet(model, lambda, k, ell, alpha_check, beta, c);
    let dl = d.g[LAMBDA];
    if dl.norm() < 1e-14 {
        return Err(Error::DegenerateTuring("d_lambda vanishes (double root)".into()));
    }
    let mut grad = [Complex64::new(0.0, 0.0); 4];
    for x in 0..4 {
        grad[x] = -d.g[x + 1] / dl;
    }
    let mut hess = [[Complex64::new(0.0, 0.0); 4]; 4];
    for x in 0..4 {
        for y in 0..4 {
            let (xi, yi) = (x + 1, y + 1);
            hess[x][y] = -(d.h[xi][yi]
                + d.h[xi][LAMBDA] * grad[y]
                + d.h[yi][LAMBDA] * grad[x]
                + d.h[LAMBDA][LAMBDA] * grad[x] * grad[y])
                / dl;
        }
    }
    Ok(EigenDerivatives { lambda, grad, hess })
}

/// One coefficient evaluated by two independent routes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub name: String,
    pub dispersion: f64,
    pub inner_product: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub consistent: bool,
}

impl CrossCheck {
    pub fn new(name: &str, dispersion: f64, inner_product: f64) -> Self {
        let abs_diff = (dispersion - inner_product).abs();
        let mag = dispersion.abs().max(inner_product.abs());
        let rel_diff = if mag > 0.0 { abs_diff / mag } else { 0.0 };
        let consistent = abs_diff <= CROSS_CHECK_ABS_TOL || rel_diff <= CROSS_CHECK_REL_TOL;
        CrossCheck { name: name.to_string(), dispersion, inner_product, abs_diff, rel_diff, consistent }
    }
}

/// Critical wavenumber, kernel vectors and linear expansion coefficients,
/// all reported in the comoving frame c = −λ_β.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuringData {
    pub k_c: f64,
    pub e0: Vector2<f64>,
    pub e0_star: Vector2<f64>,
    pub c0: f64,
    pub c0_star: f64,
    pub b: [f64; 4],
    /// Frame speed parameter, −λ_β.
    pub c: f64,
    pub a_m: f64,
    pub lambda_beta: f64,
    pub lambda_betabeta: f64,
    pub lambda_m: f64,
    pub lambda_mbeta: f64,
    pub lambda_mkappa: f64,
    pub lambda_kappabeta: f64,
    pub rho_beta: f64,
    pub rho_kappa: f64,
    pub gamma_beta: f64,
    pub gamma_kappabeta: f64,
    pub cross_checks: Vec<CrossCheck>,
}

impl TuringData {
    pub fn core(&self) -> TuringCore {
        TuringCore {
            k_c: self.k_c,
            e0: self.e0,
            e0_star: self.e0_star,
            c0: self.c0,
            c0_star: self.c0_star,
            b: self.b,
        }
    }

    pub fn l_hat0(&self) -> Matrix2<f64> {
        self.core().l_hat0()
    }

    /// γ_β = k_c(λ_β + c) for an arbitrary frame.
    pub fn gamma_beta_at(&self, c: f64) -> f64 {
        self.k_c * (self.lambda_beta + c)
    }

    /// Largest relative discrepancy among checks not already at roundoff level.
    pub fn max_cross_check_rel_diff(&self) -> f64 {
        self.cross_checks
            .iter()
            .filter(|c| c.abs_diff > CROSS_CHECK_ABS_TOL)
            .map(|c| c.rel_diff)
            .fold(0.0, f64::max)
    }
}

/// λ_| = b4/(b1+b4) and λ_|| = b1·b4/(b1+b4)³ for a singular matrix with b1 ≠ 0.
pub fn perturbation_coefficients(b: &Matrix2<f64>) -> Result<(f64, f64)> {
    let (b1, b4) = (b[(0, 0)], b[(1, 1)]);
    if b1 == 0.0 {
        return Err(Error::DegenerateNormalization("b1 = 0".into()));
    }
    let s = b1 + b4;
    if s == 0.0 {
        return Err(Error::DegenerateTuring("b1 + b4 = 0 (double zero eigenvalue)".into()));
    }
    Ok((b4 / s, b1 * b4 / (s * s * s)))
}

/// Eigenvalue of [[b1 + iδ, b2], [b3, b4]] continued from the zero eigenvalue at δ = 0.
pub fn perturbed_zero_eigenvalue(b: &Matrix2<f64>, delta: f64) -> Complex64 {
    let mut m = b.map(cx);
    m[(0, 0)] += Complex64::new(0.0, delta);
    let ev = eigenvalues2(&m);
    if ev[0].norm() <= ev[1].norm() {
        ev[0]
    } else {
        ev[1]
    }
}

fn inner(u: &Vector2<f64>, v: &Vector2<f64>) -> f64 {
    u.dot(v)
}

/// Completes every linear coefficient and cross-checks the two routes.
pub fn linear_coefficients(model: &RdModel, core: &TuringCore) -> Result<TuringData> {
    let k = core.k_c;
    let [b1, _, _, b4] = core.b;
    let [a1, _, _, a4] = model.a();
    let (e0, es) = (core.e0, core.e0_star);
    let d = model.diffusion();
    let m = model.m;

    let lambda_m_ip = inner(&(m * e0), &es);
    if lambda_m_ip.abs() < LAMBDA_M_TOL {
        return Err(Error::DegenerateUnfolding(lambda_m_ip.abs()));
    }
    let zero = Complex64::new(0.0, 0.0);

    // λ_β is frame independent apart from the shift by c
    let raw = eigen_derivatives(model, zero, k, 0.0, 0.0, 0.0, 0.0)?;
    let lambda_beta = (raw.grad[D_BETA] / Complex64::new(0.0, k)).re;
    let lambda_beta_ip = inner(&(b_matrix(0.0) * e0), &es);
    let (lambda_par, lambda_parpar) = perturbation_coefficients(&core.l_hat0())?;
    let c = -lambda_beta_ip;
    let bm = b_matrix(c);

    let der = eigen_derivatives(model, zero, k, 0.0, 0.0, 0.0, c)?;
    let mi = Complex64::new(0.0, -1.0);
    let lambda_m = der.grad[D_ALPHA].re;
    let rho_beta = 0.5 * der.hess[D_BETA][D_BETA].re;
    let rho_kappa = 0.5 * der.hess[D_K][D_K].re;
    let gamma_beta = (mi * der.grad[D_BETA]).re;
    let gamma_kappabeta = (mi * der.hess[D_K][D_BETA]).re;
    let lambda_mbeta = (mi * der.hess[D_ALPHA][D_BETA]).re / lambda_m;
    let lambda_mkappa = der.hess[D_K][D_ALPHA].re / lambda_m;
    let lambda_kappabeta = gamma_kappabeta - c;

    let w: CorrectionVectors = correction_vectors(model, core, lambda_m_ip, c)?;
    let rho_beta_ip = -k * inner(&(bm * w.w_beta), &es);
    let rho_kappa_ip = -2.0 * k * inner(&(d * w.w_kappa), &es);
    let lambda_mbeta_ip = inner(&(m * w.w_beta + bm * w.w_alpha * k), &es) / lambda_m_ip;
    let lambda_mkappa_ip = inner(&(m * w.w_kappa - d * w.w_alpha * (2.0 * k)), &es) / lambda_m_ip;
    let gamma_beta_ip = k * inner(&(bm * e0), &es);
    let gamma_kappabeta_ip = k * inner(&(bm * w.w_kappa - d * w.w_beta * 2.0), &es) + inner(&(bm * e0), &es);

    let (d1, d2) = (model.d1, model.d2);
    let rho_kappa_closed = 2.0 * (d1 * a4 + d2 * a1) / (b1 + b4);
    let (m11, m22) = (m[(0, 0)], m[(1, 1)]);
    let lambda_mbeta_closed =
        k * (m22 - lambda_m + (2.0 * lambda_m - m11 - m22) * lambda_beta) / (lambda_m * (a1 + a4 - k * k * (d1 + d2)));

    let cross_checks = vec![
        CrossCheck::new("lambda_beta", lambda_beta, lambda_beta_ip),
        CrossCheck::new("lambda_beta (perturbation)", lambda_beta, lambda_par),
        CrossCheck::new("lambda_betabeta (perturbation)", rho_beta / (k * k), lambda_parpar),
        CrossCheck::new("lambda_M", lambda_m, lambda_m_ip),
        CrossCheck::new("rho_beta", rho_beta, rho_beta_ip),
        CrossCheck::new("rho_kappa", rho_kappa, rho_kappa_ip),
        CrossCheck::new("rho_kappa (closed form)", rho_kappa, rho_kappa_closed),
        CrossCheck::new("gamma_beta", gamma_beta, gamma_beta_ip),
        CrossCheck::new("gamma_kappabeta", gamma_kappabeta, gamma_kappabeta_ip),
        CrossCheck::new("lambda_Mbeta", lambda_mbeta, lambda_mbeta_ip),
        CrossCheck::new("lambda_Mbeta (closed form)", lambda_mbeta, lambda_mbeta_closed),
        CrossCheck::new("lambda_Mkappa", lambda_mkappa, lambda_mkappa_ip),
    ];
    let bad: Vec<String> = cross_checks
        .iter()
        .filter(|c| !c.consistent)
        .map(|c| format!("{} ({} vs {})", c.name, c.dispersion, c.inner_product))
        .collect();
    if !bad.is_empty() {
        return Err(Error::Consistency(format!("coefficient routes disagree: {}", bad.join(", "))));
    }

    Ok(TuringData {
        k_c: k,
        e0,
        e0_star: es,
        c0: core.c0,
        c0_star: core.c0_star,
        b: core.b,
        c,
        a_m: model.a_m(),
        lambda_beta,
        lambda_betabeta: rho_beta / (k * k),
        lambda_m,
        lambda_mbeta,
        lambda_mkappa,
        lambda_kappabeta,
        rho_beta,
        rho_kappa,
        gamma_beta,
        gamma_kappabeta,
        cross_checks,
    })
}

/// Critical wavenumber, kernel vectors and all linear coefficients.
pub fn analyze_turing(model: &RdModel) -> Result<TuringData> {
    linear_coefficients(model, &turing_core(model)?)
}

/// Truncated expansion of the critical eigenvalue at μ.
pub fn critical_eigenvalue(t: &TuringData, mu: &Parameters) -> Complex64 {
    let (al, be, ka) = (mu.alpha, mu.beta, mu.kappa_tilde);
    let re = al + t.rho_beta * be * be + t.rho_kappa * ka * ka + t.a_m * t.lambda_mkappa * al * ka;
    let im = (t.gamma_beta + t.gamma_kappabeta * ka + t.a_m * t.lambda_mbeta * al) * be;
    Complex64::new(re, im)
}

/// Settings of [`check_turing`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuringCheckConfig {
    pub points: usize,
    /// Upper end of the radial scan in units of k_c.
    pub k_max_factor: f64,
    pub tol: f64,
    /// Largest acceptable grid spacing, if any.
    pub resolution: Option<f64>,
}

impl Default for TuringCheckConfig {
    fn default() -> Self {
        TuringCheckConfig { points: 2001, k_max_factor: 4.0, tol: 1e-8, resolution: None }
    }
}

/// Outcome of [`check_turing`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuringCheck {
    pub passed: bool,
    pub sigma_l_stable: bool,
    pub critical_at_kc: bool,
    pub negative_off_kc: bool,
    pub simple_root: bool,
    pub k_c: f64,
    pub re_lambda_at_kc: f64,
    pub max_re_lambda: f64,
    pub k_at_max: f64,
    pub d_lambda: f64,
    /// Neutral-curve samples (k, max Re λ(k)).
    pub samples: Vec<(f64, f64)>,
}

/// Largest real part of the spectrum of −k²D + L.
pub fn max_re_lambda(model: &RdModel, k: f64) -> f64 {
    let ev = eigenvalues2(&linear_operator(model, k, 0.0, 0.0, 0.0, 0.0));
    ev[0].re.max(ev[1].re)
}

/// Checks the Turing conditions by a radial scan of the dispersion relation.
pub fn check_turing(model: &RdModel, cfg: &TuringCheckConfig) -> Result<TuringCheck> {
    if cfg.points < 3 || !(cfg.k_max_factor > 1.0) {
        return Err(Error::Config("radial grid needs at least 3 points and k_max > k_c".into()));
    }
    let sigma_l_stable = model.l.trace() < 0.0 && model.l.determinant() > 0.0;
    let [a1, _, _, a4] = model.a();
    let w = model.d1 * a4 + model.d2 * a1;
    let k_c = if w > 0.0 { (w / (2.0 * model.d1 * model.d2)).sqrt() } else { 0.0 };
    let k_ref = if k_c > 0.0 { k_c } else { 1.0 };
    let k_max = cfg.k_max_factor * k_ref;
    let h = k_max / (cfg.points - 1) as f64;
    if let Some(res) = cfg.resolution {
        if h > res {
            return Err(Error::Config(format!("grid spacing {h:e} exceeds requested resolution {res:e}")));
        }
    }
    let samples: Vec<(f64, f64)> = (0..cfg.points)
        .map(|j| {
            let k = j as f64 * h;
            (k, max_re_lambda(model, k))
        })
        .collect();
    let (k_at_max, max_re) = samples.iter().fold((0.0, f64::NEG_INFINITY), |acc, &(k, r)| if r > acc.1 { (k, r) } else { acc });
    let re_kc = if k_c > 0.0 { max_re_lambda(model, k_c) } else { max_re_lambda(model, 0.0) };
    let critical_at_kc = k_c > 0.0 && re_kc.abs() <= cfg.tol;
    let negative_off_kc = max_re <= cfg.tol
        && samples.iter().all(|&(k, r)| r < -cfg.tol || (k - k_c).abs() <= 2.0 * h);
    let d_lambda = if k_c > 0.0 {
        let l0 = model.l - model.diffusion() * (k_c * k_c);
        -l0.trace()
    } else {
        0.0
    };
    let simple_root = d_lambda.abs() > 1e-12;
    Ok(TuringCheck {
        passed: sigma_l_stable && critical_at_kc && negative_off_kc && simple_root,
        sigma_l_stable,
        critical_at_kc,
        negative_off_kc,
        simple_root,
        k_c,
        re_lambda_at_kc: re_kc,
        max_re_lambda: max_re,
        k_at_max,
        d_lambda,
        samples,
    })
}

/// Samples of the critical eigenvalue on the circle k² + ℓ² = k_c².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquireScan {
    /// (k, ℓ, Re λ_c)
    pub samples: Vec<(f64, f64, f64)>,
    pub argmax: (f64, f64),
    pub max_re: f64,
    pub re_at_k_zero: f64,
    pub argmax_at_ell_zero: bool,
}

/// Scans Re λ_c over the upper half of the critical circle.
pub fn squire_scan(model: &RdModel, turing: &TuringData, alpha_check: f64, beta: f64, points: usize) -> Result<SquireScan> {
    if points < 3 {
        return Err(Error::Config("Squire scan needs at least 3 points".into()));
    }
    let kc = turing.k_c;
    let crit = |k: f64, ell: f64| {
        let ev = eigenvalues2(&linear_operator(model, k, ell, alpha_check, beta, turing.c));
        ev[0].re.max(ev[1].re)
    };
    let samples: Vec<(f64, f64, f64)> = (0..points)
        .map(|j| {
            let th = std::f64::consts::PI * j as f64 / (points - 1) as f64;
            let (k, ell) = (kc * th.cos(), kc * th.sin());
            (k, ell, crit(k, ell))
        })
        .collect();
    let best = samples
        .iter()
        .copied()
        .fold((0.0, 0.0, f64::NEG_INFINITY), |a, s| if s.2 > a.2 { s } else { a });
    let re_at_k_zero = crit(0.0, kc);
    Ok(SquireScan {
        argmax: (best.0, best.1),
        max_re: best.2,
        re_at_k_zero,
        argmax_at_ell_zero: best.1.abs() <= 1e-12 * kc,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_model;

    #[test]
    fn example_wavenumber_and_kernel() {
        let m = example_model();
        let core = turing_core(&m).unwrap();
        assert_eq!(core.k_c, 1.0);
        let s5 = 5f64.sqrt();
        assert!((core.e0 - Vector2::new(-1.0, -2.0) / s5).norm() < 1e-15);
        assert!((core.e0_star - Vector2::new(-7.0, 1.0) / s5).norm() < 1e-15);
        assert!((core.e0.dot(&core.e0_star) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn example_linear_coefficients() {
        let t = analyze_turing(&example_model()).unwrap();
        assert!((t.lambda_beta - 1.4).abs() < 1e-14);
        assert!((t.lambda_betabeta - 14.0 / 125.0).abs() < 1e-14);
        assert!((t.rho_beta - 14.0 / 125.0).abs() < 1e-14);
        assert!((t.rho_kappa + 14.0 / 5.0).abs() < 1e-13);
        assert!((t.c + 1.4).abs() < 1e-15);
        assert!(t.gamma_beta.abs() < 1e-14);
        assert!((t.lambda_m - 12.24).abs() < 1e-12);
        assert!(t.max_cross_check_rel_diff() < 1e-10 || t.cross_checks.iter().all(|c| c.abs_diff < 1e-12));
    }

    #[test]
    fn lambda_m_matches_finite_difference() {
        let m = example_model();
        let t = analyze_turing(&m).unwrap();
        let h = 1e-5;
        let ev = |a: f64| {
            let e = eigenvalues2(&linear_operator(&m, 1.0, 0.0, a, 0.0, 0.0));
            if e[0].norm() < e[1].norm() { e[0] } else { e[1] }
        };
        let fd = (ev(h) - ev(-h)).re / (2.0 * h);
        assert!((fd - t.lambda_m).abs() < 1e-6);
    }

    #[test]
    fn identity_unfolding_gives_unit_lambda_m() {
        let mut m = example_model();
        m.m = Matrix2::identity();
        m.is_m_identity = true;
        let t = analyze_turing(&m).unwrap();
        assert!((t.lambda_m - 1.0).abs() < 1e-14);
        assert!(t.lambda_mbeta.abs() < 1e-13);
        assert!(t.lambda_mkappa.abs() < 1e-13);
        assert_eq!(t.a_m, 0.0);
    }

    #[test]
    fn degenerate_unfolding_is_rejected() {
        let mut m = example_model();
        let core = turing_core(&m).unwrap();
        let lm = (m.m * core.e0).dot(&core.e0_star);
        m.m -= Matrix2::identity() * lm;
        assert!(matches!(linear_coefficients(&m, &core), Err(Error::DegenerateUnfolding(_))));
    }

    #[test]
    fn dispersion_values() {
        let m = example_model();
        assert!(dispersion(&m, Complex64::new(0.0, 0.0), 1.0, 0.0, 0.0, 0.0, 0.0).norm() < 1e-14);
        let d0 = dispersion(&m, Complex64::new(0.0, 0.0), 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!((d0.re - 3.5).abs() < 1e-14);
        // (3 - 1.21)(-3.5 - 3.5*1.21) + 14
        let d = dispersion(&m, Complex64::new(0.0, 0.0), 1.1, 0.0, 0.0, 0.0, 0.0);
        let hand = (3.0 - 1.21) * (-3.5 - 3.5 * 1.21) + 14.0;
        assert!((d.re - hand).abs() < 1e-13 && d.im == 0.0 && hand != 0.0);
    }

    #[test]
    fn jet_derivatives_match_finite_differences() {
        let m = example_model();
        let lam = Complex64::new(0.1, -0.2);
        let (k, ell, a, b, c) = (0.9, 0.2, 0.05, 0.3, -1.4);
        let j = dispersion_jet(&m, lam, k, ell, a, b, c);
        let h = 1e-6;
        let fk = (dispersion(&m, lam, k + h, ell, a, b, c) - dispersion(&m, lam, k - h, ell, a, b, c)) / (2.0 * h);
        assert!((fk - j.g[K]).norm() < 1e-7);
        let fb = (dispersion(&m, lam, k, ell, a, b + h, c) - dispersion(&m, lam, k, ell, a, b - h, c)) / (2.0 * h);
        assert!((fb - j.g[BETA]).norm() < 1e-7);
        assert!((j.v - dispersion(&m, lam, k, ell, a, b, c)).norm() < 1e-14);
    }

    #[test]
    fn critical_eigenvalue_has_cubic_error() {
        let m = example_model();
        let t = analyze_turing(&m).unwrap();
        let err = |beta: f64| {
            let ev = eigenvalues2(&linear_operator(&m, t.k_c, 0.0, 0.0, beta, t.c));
            let exact = if ev[0].norm() < ev[1].norm() { ev[0] } else { ev[1] };
            (exact - critical_eigenvalue(&t, &Parameters::new(0.0, beta, 0.0))).norm()
        };
        let (e1, e2, e3) = (err(0.1), err(0.05), err(0.025));
        assert!(e1 / e2 > 6.0 && e2 / e3 > 7.0, "{e1} {e2} {e3}");
        assert_eq!(critical_eigenvalue(&t, &Parameters::default()), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn check_turing_cases() {
        let m = example_model();
        assert!(check_turing(&m, &TuringCheckConfig::default()).unwrap().passed);
        let decay = RdModel::linear([1.0, 1.0], Matrix2::new(-1.0, 0.0, 0.0, -2.0), Matrix2::identity()).unwrap();
        let r = check_turing(&decay, &TuringCheckConfig::default()).unwrap();
        assert!(!r.passed && r.max_re_lambda < 0.0);
        let coarse = TuringCheckConfig { resolution: Some(1e-4), ..Default::default() };
        assert!(matches!(check_turing(&m, &coarse), Err(Error::Config(_))));
    }

    #[test]
    fn squire_scan_example() {
        let m = example_model();
        let t = analyze_turing(&m).unwrap();
        let s = squire_scan(&m, &t, 0.0, 0.5, 181).unwrap();
        assert!(s.argmax_at_ell_zero);
        assert!(s.re_at_k_zero.abs() < 1e-12);
        let gain = s.max_re - s.re_at_k_zero;
        assert!((gain - t.rho_beta * 0.25).abs() < 0.02, "{gain}");
        let flat = squire_scan(&m, &t, 0.0, 0.0, 37).unwrap();
        let spread = flat.samples.iter().map(|s| s.2.abs()).fold(0.0, f64::max);
        assert!(spread < 1e-12);
    }

    #[test]
    fn off_diagonal_product_at_kc() {
        let m = example_model();
        let k = critical_wavenumber(&m).unwrap();
        let [a1, a2, a3, a4] = m.a();
        let lhs = a2 * a3;
        let rhs = (a1 - k * k * m.d1) * (a4 - k * k * m.d2);
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
    }
}
