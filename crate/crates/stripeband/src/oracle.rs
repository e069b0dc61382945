//! Independent numerical oracle.
//!
//! Stripes are computed by Newton iteration on a truncated Fourier–Galerkin
//! system in the comoving frame, with the speed parameter c as an unknown and
//! a phase condition closing the system. Their stability is read off the
//! Floquet–Bloch matrices T(γ, ℓ), assembled in Fourier space and
//! diagonalized densely.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{growth_rate, profile_modes};
use crate::model::{b_matrix, Parameters, RdModel};
use crate::sideband::{RegionLabel, DEAD_BAND};
use crate::Analysis;

/// Default truncation order.
pub const DEFAULT_N: usize = 32;
/// Default Newton tolerance on the residual norm.
pub const DEFAULT_TOL: f64 = 1e-11;
/// Default coarse finite-difference step; the fine step is half of it.
pub const DEFAULT_H: f64 = 1e-3;

const MAX_NEWTON: usize = 40;
const TRUNCATION_RATIO: f64 = 1e-8;
const AMBIGUITY_TOL: f64 = 1e-10;

type C = Complex64;

fn cz() -> C {
    C::new(0.0, 0.0)
}

/// Oracle settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    pub n: usize,
    pub tol: f64,
    pub h: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { n: DEFAULT_N, tol: DEFAULT_TOL, h: DEFAULT_H }
    }
}

/// Truncated Fourier representation of a stripe, modes −N..N.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericStripe {
    pub n: usize,
    /// Coefficient of mode m stored at index m + N; conjugate symmetric.
    #[serde(skip)]
    pub coeffs: Vec<Vector2<C>>,
    pub c: f64,
    pub mu: Parameters,
    pub kappa: f64,
    pub alpha_check: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    /// The solver converged to the zero state.
    pub trivial: bool,
    /// The highest mode is not negligible relative to mode 1.
    pub truncation_warning: bool,
    /// Newton needed continuation from the bifurcation surface.
    pub continued: bool,
}

impl NumericStripe {
    pub fn mode(&self, m: i64) -> Vector2<C> {
        self.coeffs[(m + self.n as i64) as usize]
    }

    /// |⟨u₁, E₀*⟩|, the amplitude in the normalization of the expansion.
    pub fn amplitude(&self, e0_star: &Vector2<f64>) -> f64 {
        let u1 = self.mode(1);
        (u1[0] * e0_star[0] + u1[1] * e0_star[1]).norm()
    }

    /// Samples the real profile on the rescaled period.
    pub fn profile(&self, xs: &[f64]) -> Vec<Vector2<f64>> {
        xs.iter()
            .map(|&x| {
                let mut u = self.mode(0).map(|z| z.re);
                for m in 1..=self.n as i64 {
                    let e = C::new((m as f64 * x).cos(), (m as f64 * x).sin());
                    u += self.mode(m).map(|z| 2.0 * (z * e).re);
                }
                u
            })
            .collect()
    }
}

struct Galerkin<'a> {
    model: &'a RdModel,
    n: usize,
    kappa: f64,
    alpha_check: f64,
    beta: f64,
}

impl Galerkin<'_> {
    fn size(&self) -> usize {
        2 * (2 * self.n + 1)
    }

    fn linear_block(&self, q: f64, ell: f64, c: f64) -> Matrix2<C> {
        let m = self.model;
        let re = m.l + m.m * self.alpha_check - m.diffusion() * (self.kappa * self.kappa * (q * q + ell * ell));
        let im = b_matrix(c) * (self.beta * self.kappa * q);
        Matrix2::from_fn(|i, j| C::new(re[(i, j)], im[(i, j)]))
    }

    /// Σ_{p+q=n} u_p u_qᵀ for n in −2N..2N.
    fn square(&self, u: &[Vector2<C>]) -> Vec<Matrix2<C>> {
        let n = self.n as i64;
        let mut out = vec![Matrix2::zeros(); (4 * n + 1) as usize];
        for p in -n..=n {
            let up = u[(p + n) as usize];
            for q in -n..=n {
                let uq = u[(q + n) as usize];
                out[(p + q + 2 * n) as usize] += up * uq.transpose();
            }
        }
        out
    }

    /// Matrix of w ↦ Σ T_i,jkl uu_jk w_l.
    fn cubic_of(&self, uu: &Matrix2<C>) -> Matrix2<C> {
        let t = &self.model.t;
        Matrix2::from_fn(|i, l| {
            let mut acc = cz();
            for j in 0..2 {
                for k in 0..2 {
                    acc += uu[(j, k)] * t[i][j][k][l];
                }
            }
            acc
        })
    }

    /// Multiplication blocks J_n of 2Q[U,·] + 3K[U,U,·], n in −2N..2N.
    fn multiplication(&self, u: &[Vector2<C>], uu: &[Matrix2<C>]) -> Vec<Matrix2<C>> {
        let n = self.n as i64;
        (-2 * n..=2 * n)
            .map(|k| {
                let mut j = self.cubic_of(&uu[(k + 2 * n) as usize]) * C::new(3.0, 0.0);
                if k.abs() <= n {
                    j += self.model.quad_matrix(&u[(k + n) as usize]) * C::new(2.0, 0.0);
                }
                j
            })
            .collect()
    }

    fn residual(&self, u: &[Vector2<C>], c: f64, uu: &[Matrix2<C>]) -> Vec<Vector2<C>> {
        let n = self.n as i64;
        (-n..=n)
            .map(|m| {
                let mut r = self.linear_block(m as f64, 0.0, c) * u[(m + n) as usize];
                for p in -n..=n {
                    let q = m - p;
                    if q.abs() <= n {
                        r += self.model.quad(&u[(p + n) as usize], &u[(q + n) as usize]);
                    }
                }
                for k in -2 * n..=2 * n {
                    let q = m - k;
                    if q.abs() <= n {
                        r += self.cubic_of(&uu[(k + 2 * n) as usize]) * u[(q + n) as usize];
                    }
                }
                r
            })
            .collect()
    }

    fn bloch(&self, u: &[Vector2<C>], c: f64, gamma: f64, ell: f64) -> DMatrix<C> {
        let uu = self.square(u);
        let jm = self.multiplication(u, &uu);
        self.bloch_with(&jm, c, gamma, ell)
    }

    fn bloch_with(&self, jm: &[Matrix2<C>], c: f64, gamma: f64, ell: f64) -> DMatrix<C> {
        let n = self.n as i64;
        let size = self.size();
        let mut t = DMatrix::zeros(size, size);
        for a in -n..=n {
            let ia = 2 * (a + n) as usize;
            for b in -n..=n {
                let ib = 2 * (b + n) as usize;
                let mut blk = jm[(a - b + 2 * n) as usize];
                if a == b {
                    blk += self.linear_block(a as f64 + gamma, ell, c);
                }
                t.view_mut((ia, ib), (2, 2)).copy_from(&blk);
            }
        }
        t
    }
}

fn unpack(x: &DVector<f64>, n: usize) -> (Vec<Vector2<C>>, f64) {
    let ni = n as i64;
    let mut u = vec![Vector2::new(cz(), cz()); 2 * n + 1];
    u[n] = Vector2::new(C::new(x[0], 0.0), C::new(x[1], 0.0));
    for k in 1..=ni {
        let s = 2 + 4 * (k as usize - 1);
        let v = Vector2::new(C::new(x[s], x[s + 2]), C::new(x[s + 1], x[s + 3]));
        u[(ni + k) as usize] = v;
        u[(ni - k) as usize] = v.map(|z| z.conj());
    }
    (u, x[4 * n + 2])
}

fn pack(u: &[Vector2<C>], c: f64, n: usize) -> DVector<f64> {
    let mut x = DVector::zeros(4 * n + 3);
    x[0] = u[n][0].re;
    x[1] = u[n][1].re;
    for k in 1..=n {
        let s = 2 + 4 * (k - 1);
        let v = u[n + k];
        x[s] = v[0].re;
        x[s + 1] = v[1].re;
        x[s + 2] = v[0].im;
        x[s + 3] = v[1].im;
    }
    x[4 * n + 2] = c;
    x
}

/// Real residual rows for modes 0..N; the phase row is appended by the caller.
fn real_rows(r: &[Vector2<C>], n: usize, out: &mut DVector<f64>) {
    out[0] = r[n][0].re;
    out[1] = r[n][1].re;
    for k in 1..=n {
        let s = 2 + 4 * (k - 1);
        let v = r[n + k];
        out[s] = v[0].re;
        out[s + 1] = v[1].re;
        out[s + 2] = v[0].im;
        out[s + 3] = v[1].im;
    }
}

struct NewtonOutcome {
    u: Vec<Vector2<C>>,
    c: f64,
    residual: f64,
    iterations: usize,
}

fn newton(g: &Galerkin, u0: Vec<Vector2<C>>, c0: f64, tol: f64) -> Result<NewtonOutcome> {
    let n = g.n;
    let dim = 4 * n + 3;
    let phase_idx = 4; // Im u_1, first component
    let mut x = pack(&u0, c0, n);
    let mut last = f64::INFINITY;
    for it in 0..=MAX_NEWTON {
        let (u, c) = unpack(&x, n);
        let uu = g.square(&u);
        let r = g.residual(&u, c, &uu);
        let mut f = DVector::zeros(dim);
        real_rows(&r, n, &mut f);
        f[dim - 1] = x[phase_idx];
        let nrm = f.norm();
        if !nrm.is_finite() {
            break;
        }
        last = nrm;
        if nrm < tol {
            return Ok(NewtonOutcome { u, c, residual: nrm, iterations: it });
        }
        if it == MAX_NEWTON {
            break;
        }
        let jm = g.multiplication(&u, &uu);
        let t = g.bloch_with(&jm, c, 0.0, 0.0);
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        let mut col = DVector::zeros(dim);
        let ni = n as i64;
        let column = |dv: &dyn Fn(usize) -> C, col: &mut DVector<f64>| {
            // dv(row) gives (T dU)_row
            let tv: Vec<Vector2<C>> = (0..2 * n + 1).map(|a| Vector2::new(dv(2 * a), dv(2 * a + 1))).collect();
            real_rows(&tv, n, col);
        };
        for j in 0..2 {
            let cj = 2 * n + j; // mode 0
            column(&|row| t[(row, cj)], &mut col);
            jac.view_mut((0, j), (dim - 1, 1)).copy_from(&col.rows(0, dim - 1));
        }
        for k in 1..=ni {
            let s = 2 + 4 * (k as usize - 1);
            for j in 0..2 {
                let cp = 2 * (ni + k) as usize + j;
                let cm = 2 * (ni - k) as usize + j;
                column(&|row| t[(row, cp)] + t[(row, cm)], &mut col);
                jac.view_mut((0, s + j), (dim - 1, 1)).copy_from(&col.rows(0, dim - 1));
                let i = C::new(0.0, 1.0);
                column(&|row| i * (t[(row, cp)] - t[(row, cm)]), &mut col);
                jac.view_mut((0, s + 2 + j), (dim - 1, 1)).copy_from(&col.rows(0, dim - 1));
            }
        }
        let dc: Vec<Vector2<C>> = (-ni..=ni)
            .map(|m| u[(m + ni) as usize] * C::new(0.0, g.beta * g.kappa * m as f64))
            .collect();
        real_rows(&dc, n, &mut col);
        let c_col_norm = col.rows(0, dim - 1).norm();
        jac.view_mut((0, dim - 1), (dim - 1, 1)).copy_from(&col.rows(0, dim - 1));
        jac[(dim - 1, phase_idx)] = 1.0;
        let scale = jac.abs().max().max(1.0);
        let step = if c_col_norm <= 1e-12 * scale {
            // c is undetermined: least squares with the c increment pinned
            let mut ja = DMatrix::zeros(dim + 1, dim);
            ja.view_mut((0, 0), (dim, dim)).copy_from(&jac);
            ja[(dim, dim - 1)] = 1.0;
            let mut fa = DVector::zeros(dim + 1);
            fa.rows_mut(0, dim).copy_from(&f);
            ja.svd(true, true).solve(&fa, 1e-14).map_err(|e| Error::Consistency(e.to_string()))?
        } else {
            match jac.clone().lu().solve(&f) {
                Some(s) => s,
                None => break,
            }
        };
        x -= step;
    }
    Err(Error::NoConvergence { residual: last, iterations: MAX_NEWTON })
}

fn rotate_phase(u: &mut [Vector2<C>], n: usize) {
    let z = u[n + 1][0];
    if z.norm() == 0.0 {
        return;
    }
    let phi = z.arg();
    let ni = n as i64;
    for m in -ni..=ni {
        let r = C::from_polar(1.0, -(m as f64) * phi);
        u[(m + ni) as usize] *= r;
    }
}

fn seed(analysis: &Analysis, mu: &Parameters, n: usize) -> Result<(Vec<Vector2<C>>, f64)> {
    let t = &analysis.turing;
    let mut u = vec![Vector2::new(cz(), cz()); 2 * n + 1];
    let c = crate::expansion::velocity(t, mu);
    if let Some(p) = profile_modes(t, &analysis.expansion, mu)? {
        u[n] = p.mode0.map(|x| C::new(x, 0.0));
        u[n + 1] = p.mode1;
        u[n - 1] = p.mode1.map(|z| z.conj());
        if n >= 2 {
            u[n + 2] = p.mode2.map(|x| C::new(x, 0.0));
            u[n - 2] = u[n + 2];
        }
        rotate_phase(&mut u, n);
    }
    Ok((u, c))
}

fn finish(g: &Galerkin, out: NewtonOutcome, mu: &Parameters, continued: bool) -> NumericStripe {
    let n = g.n;
    let u1 = out.u[n + 1].norm();
    let un = out.u[2 * n].norm();
    NumericStripe {
        n,
        trivial: u1 < 1e-8,
        truncation_warning: u1 > 0.0 && un > TRUNCATION_RATIO * u1,
        coeffs: out.u,
        c: out.c,
        mu: *mu,
        kappa: g.kappa,
        alpha_check: g.alpha_check,
        residual_norm: out.residual,
        iterations: out.iterations,
        continued,
    }
}

/// Solves the truncated steady comoving stripe equation at μ.
pub fn solve_stripe_numeric(analysis: &Analysis, mu: &Parameters, n: usize, tol: f64) -> Result<NumericStripe> {
    if n < 8 {
        return Err(Error::Config(format!("truncation order N = {n} is below 8")));
    }
    let t = &analysis.turing;
    let g = Galerkin {
        model: &analysis.model,
        n,
        kappa: t.k_c + mu.kappa_tilde,
        alpha_check: mu.alpha_check(t.lambda_m),
        beta: mu.beta,
    };
    let (u0, c0) = seed(analysis, mu, n)?;
    match newton(&g, u0, c0, tol) {
        Ok(out) => Ok(finish(&g, out, mu, false)),
        Err(first) => {
            // continuation from just above the bifurcation surface
            let above = growth_rate(t, mu);
            if !(above > 0.0) {
                return Err(first);
            }
            for steps in [8usize, 32] {
                let mut state: Option<(Vec<Vector2<C>>, f64)> = None;
                let mut ok = true;
                for s in 1..=steps {
                    let frac = s as f64 / steps as f64;
                    let mu_s = Parameters { alpha: mu.alpha - above * (1.0 - frac), ..*mu };
                    let gs = Galerkin { alpha_check: mu_s.alpha_check(t.lambda_m), ..g };
                    let (u, c) = match state.take() {
                        Some(st) => st,
                        None => seed(analysis, &mu_s, n)?,
                    };
                    match newton(&gs, u, c, tol) {
                        Ok(out) => state = Some((out.u, out.c)),
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    if let Some((u, c)) = state {
                        let out = newton(&g, u, c, tol)?;
                        return Ok(finish(&g, out, mu, true));
                    }
                }
            }
            Err(first)
        }
    }
}

/// Floquet–Bloch matrix T(γ, ℓ) of size 2(2N+1).
pub fn assemble_bloch_matrix(model: &RdModel, stripe: &NumericStripe, gamma: f64, ell: f64) -> DMatrix<C> {
    let g = Galerkin {
        model,
        n: stripe.n,
        kappa: stripe.kappa,
        alpha_check: stripe.alpha_check,
        beta: stripe.mu.beta,
    };
    g.bloch(&stripe.coeffs, stripe.c, gamma, ell)
}

/// All eigenvalues of a dense complex matrix, from its Schur form.
pub fn eigenvalues(m: DMatrix<C>) -> Vec<C> {
    let (_, t) = m.schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// One tracked Bloch eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochSample {
    pub gamma: f64,
    pub ell: f64,
    #[serde(skip)]
    pub eigenvalue: C,
    /// A second eigenvalue lies within the ambiguity tolerance of the predictor.
    pub ambiguous: bool,
    #[serde(skip)]
    pub full_spectrum: Option<Vec<C>>,
}

impl BlochSample {
    pub fn max_re(&self) -> Option<f64> {
        self.full_spectrum.as_ref().map(|s| s.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
    }
}

/// The eigenvalue of T(γ, ℓ) nearest to `predictor`.
pub fn track_eigenvalue(model: &RdModel, stripe: &NumericStripe, gamma: f64, ell: f64, predictor: C) -> BlochSample {
    let ev = eigenvalues(assemble_bloch_matrix(model, stripe, gamma, ell));
    let mut order: Vec<(f64, usize)> = ev.iter().enumerate().map(|(i, z)| ((z - predictor).norm(), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ambiguous = order.len() > 1 && order[1].0 <= AMBIGUITY_TOL;
    BlochSample { gamma, ell, eigenvalue: ev[order[0].1], ambiguous, full_spectrum: Some(ev) }
}

/// Sideband direction of a finite-difference probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Gamma,
    Ell,
}

/// Finite-difference curvature of the tracked eigenvalue at the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curvature {
    pub direction: Direction,
    /// Richardson-extrapolated second derivative of Re λ.
    pub second_derivative: f64,
    /// Richardson-extrapolated first derivative of Im λ (zero for ℓ by symmetry).
    pub first_derivative_im: f64,
    pub error_estimate: f64,
    pub unreliable: bool,
    pub ambiguous: bool,
    /// Largest real part over all sampled spectra.
    pub max_re_sampled: f64,
}

impl Curvature {
    /// Coefficient of the squared wavenumber, half the second derivative.
    pub fn coefficient(&self) -> f64 {
        0.5 * self.second_derivative
    }
}

struct Stencil {
    second: f64,
    first_im: f64,
    ambiguous: bool,
    max_re: f64,
}

fn stencil(model: &RdModel, stripe: &NumericStripe, dir: Direction, h: f64, origin: &BlochSample) -> Stencil {
    let at = |s: f64, pred: C| match dir {
        Direction::Gamma => track_eigenvalue(model, stripe, s, 0.0, pred),
        Direction::Ell => track_eigenvalue(model, stripe, 0.0, s, pred),
    };
    let l0 = origin.eigenvalue;
    let march = |sign: f64| {
        let a = at(sign * h, l0);
        let b = at(sign * 2.0 * h, a.eigenvalue * 2.0 - l0);
        (a, b)
    };
    let (p1, p2) = march(1.0);
    let (m1, m2) = match dir {
        // λ depends on ℓ only through ℓ²
        Direction::Ell => (p1.clone(), p2.clone()),
        Direction::Gamma => march(-1.0),
    };
    let f = |s: &BlochSample| s.eigenvalue;
    let second = (-f(&p2) + f(&p1) * 16.0 - l0 * 30.0 + f(&m1) * 16.0 - f(&m2)) / (12.0 * h * h);
    let first = (-f(&p2) + f(&p1) * 8.0 - f(&m1) * 8.0 + f(&m2)) / (12.0 * h);
    let samples = [&p1, &p2, &m1, &m2];
    Stencil {
        second: second.re,
        first_im: if dir == Direction::Ell { 0.0 } else { first.im },
        ambiguous: samples.iter().any(|s| s.ambiguous),
        max_re: samples.iter().filter_map(|s| s.max_re()).fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Fourth-order central differences at steps h and h/2 with Richardson extrapolation.
pub fn curvature_fd(model: &RdModel, stripe: &NumericStripe, direction: Direction, h: f64) -> Curvature {
    let origin = track_eigenvalue(model, stripe, 0.0, 0.0, cz());
    curvature_fd_from(model, stripe, direction, h, &origin)
}

fn curvature_fd_from(model: &RdModel, stripe: &NumericStripe, direction: Direction, h: f64, origin: &BlochSample) -> Curvature {
    let coarse = stencil(model, stripe, direction, h, origin);
    let fine = stencil(model, stripe, direction, 0.5 * h, origin);
    let second = fine.second + (fine.second - coarse.second) / 15.0;
    let first = fine.first_im + (fine.first_im - coarse.first_im) / 15.0;
    let error_estimate = (fine.second - coarse.second).abs() / 15.0;
    Curvature {
        direction,
        second_derivative: second,
        first_derivative_im: first,
        error_estimate,
        unreliable: error_estimate > 0.1 * second.abs(),
        ambiguous: coarse.ambiguous || fine.ambiguous || origin.ambiguous,
        max_re_sampled: coarse.max_re.max(fine.max_re).max(origin.max_re().unwrap_or(f64::NEG_INFINITY)),
    }
}

/// Result of a full Bloch spectrum scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumScan {
    pub max_re: f64,
    pub argmax: (f64, f64),
    /// Largest real part once the translation eigenvalue at the origin is removed.
    pub max_re_off_origin: f64,
    /// (γ, ℓ, λ) for every eigenvalue of every grid point.
    #[serde(skip)]
    pub points: Vec<(f64, f64, C)>,
}

/// Max Re λ over all eigenvalues of T(γ, ℓ) on the grid.
pub fn full_spectrum_scan(model: &RdModel, stripe: &NumericStripe, gamma_grid: &[f64], ell_grid: &[f64]) -> SpectrumScan {
    let grid: Vec<(f64, f64)> = gamma_grid.iter().flat_map(|&g| ell_grid.iter().map(move |&l| (g, l))).collect();
    let spectra: Vec<(f64, f64, Vec<C>)> = grid
        .par_iter()
        .map(|&(g, l)| (g, l, eigenvalues(assemble_bloch_matrix(model, stripe, g, l))))
        .collect();
    let mut max_re = f64::NEG_INFINITY;
    let mut argmax = (0.0, 0.0);
    let mut off = f64::NEG_INFINITY;
    let mut points = Vec::new();
    for (g, l, ev) in spectra {
        let translation = if g == 0.0 && l == 0.0 {
            ev.iter().enumerate().min_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).map(|(i, _)| i)
        } else {
            None
        };
        for (i, z) in ev.iter().enumerate() {
            if z.re > max_re {
                max_re = z.re;
                argmax = (g, l);
            }
            if Some(i) != translation {
                off = off.max(z.re);
            }
            points.push((g, l, *z));
        }
    }
    SpectrumScan { max_re, argmax, max_re_off_origin: off, points }
}

/// Label assigned by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleLabel {
    Region(RegionLabel),
    NoConvergence,
}

impl OracleLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            OracleLabel::Region(r) => r.as_str(),
            OracleLabel::NoConvergence => "no-convergence",
        }
    }
}

/// Oracle measurements at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleMapPoint {
    pub kappa_tilde: f64,
    pub alpha: f64,
    pub label: OracleLabel,
    /// Largest real part seen among the sampled Bloch spectra.
    pub max_re_lambda: f64,
    pub zz_curvature: f64,
    pub eh_curvature: f64,
    pub a_numeric: f64,
    pub c_numeric: f64,
}

/// Zigzag and Eckhaus curvature coefficients of a converged stripe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SidebandMeasurement {
    pub zigzag: Curvature,
    pub eckhaus: Curvature,
}

pub fn measure_sidebands(model: &RdModel, stripe: &NumericStripe, h: f64) -> SidebandMeasurement {
    let origin = track_eigenvalue(model, stripe, 0.0, 0.0, cz());
    SidebandMeasurement {
        zigzag: curvature_fd_from(model, stripe, Direction::Ell, h, &origin),
        eckhaus: curvature_fd_from(model, stripe, Direction::Gamma, h, &origin),
    }
}

/// Evaluates one map point; failures become `NoConvergence`.
pub fn oracle_point(analysis: &Analysis, mu: &Parameters, cfg: &OracleConfig) -> OracleMapPoint {
    let base = OracleMapPoint {
        kappa_tilde: mu.kappa_tilde,
        alpha: mu.alpha,
        label: OracleLabel::NoConvergence,
        max_re_lambda: f64::NAN,
        zz_curvature: f64::NAN,
        eh_curvature: f64::NAN,
        a_numeric: f64::NAN,
        c_numeric: f64::NAN,
    };
    let Ok(stripe) = solve_stripe_numeric(analysis, mu, cfg.n, cfg.tol) else {
        return base;
    };
    let a = stripe.amplitude(&analysis.turing.e0_star);
    if stripe.trivial {
        return OracleMapPoint {
            label: OracleLabel::Region(RegionLabel::NoStripes),
            a_numeric: a,
            c_numeric: stripe.c,
            ..base
        };
    }
    let s = measure_sidebands(&analysis.model, &stripe, cfg.h);
    let zz = s.zigzag.coefficient();
    let eh = s.eckhaus.coefficient();
    OracleMapPoint {
        label: OracleLabel::Region(RegionLabel::from_flags(eh > DEAD_BAND, zz > DEAD_BAND)),
        max_re_lambda: s.zigzag.max_re_sampled.max(s.eckhaus.max_re_sampled),
        zz_curvature: zz,
        eh_curvature: eh,
        a_numeric: a,
        c_numeric: stripe.c,
        ..base
    }
}

/// Oracle region map; rows run over α, columns over κ̃.
pub fn stability_map(
    analysis: &Analysis,
    alpha_grid: &[f64],
    kappa_grid: &[f64],
    beta: f64,
    cfg: &OracleConfig,
) -> Vec<OracleMapPoint> {
    let grid: Vec<Parameters> = alpha_grid
        .iter()
        .flat_map(|&a| kappa_grid.iter().map(move |&k| Parameters::new(a, beta, k)))
        .collect();
    grid.par_iter().map(|mu| oracle_point(analysis, mu, cfg)).collect()
}

/// Drift identity Im(∂_γλ)₀/(κβ) + (c − c_g) with c_g = d(κc)/dκ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupVelocityCheck {
    pub drift: f64,
    pub c: f64,
    pub c_group: f64,
    pub defect: f64,
}

/// Measures the drift identity with neighbouring solves at κ̃ ± dk.
pub fn group_velocity_check(analysis: &Analysis, mu: &Parameters, cfg: &OracleConfig, dk: f64) -> Result<GroupVelocityCheck> {
    let solve = |kt: f64| solve_stripe_numeric(analysis, &Parameters { kappa_tilde: kt, ..*mu }, cfg.n, cfg.tol);
    let s0 = solve(mu.kappa_tilde)?;
    let sp = solve(mu.kappa_tilde + dk)?;
    let sm = solve(mu.kappa_tilde - dk)?;
    let omega = |s: &NumericStripe| s.kappa * s.c;
    let c_group = (omega(&sp) - omega(&sm)) / (2.0 * dk);
    let drift = curvature_fd(&analysis.model, &s0, Direction::Gamma, cfg.h).first_derivative_im;
    // Im(∂_γλ)₀ = κβ(c − c_g)
    let defect = drift / (s0.kappa * mu.beta) - (s0.c - c_group);
    Ok(GroupVelocityCheck { drift, c: s0.c, c_group, defect })
}
