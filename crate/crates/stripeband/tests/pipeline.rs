mod common;

use nalgebra::{Matrix2, Vector2};
use stripeband::expansion::{amplitude, profile_modes, stripe_expansion, stripe_profile, velocity};
use stripeband::fixtures::example_model;
use stripeband::ingestion::{klausmeier_normal_form, parse_model, KlausmeierSpec};
use stripeband::model::{eval_reaction, validate_model};
use stripeband::oracle::{
    curvature_fd, full_spectrum_scan, group_velocity_check, measure_sidebands, solve_stripe_numeric, track_eigenvalue,
    Direction, OracleConfig,
};
use stripeband::sideband::{
    boundaries, classify_region, eckhaus_curvature, rho_betabeta_closed_form, zigzag_coefficients, zigzag_curvature,
    RegionLabel,
};
use stripeband::turing::{analyze_turing, check_turing, critical_eigenvalue, dispersion, TuringCheckConfig};
use stripeband::{Analysis, Parameters};

use num_complex::Complex64;

fn example() -> Analysis {
    Analysis::new(example_model()).unwrap()
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn example_fixture_matches_builtin_model() {
    assert_eq!(parse_model(&fixture("example51.json")).unwrap(), example_model());
}

#[test]
fn klausmeier_fixture_matches_normal_form() {
    let nf = klausmeier_normal_form(&KlausmeierSpec::default()).unwrap();
    let m = parse_model(&fixture("klausmeier.json")).unwrap();
    assert!((m.l - nf.model.l).abs().max() < 1e-12);
    assert!((m.m - nf.model.m).abs().max() < 1e-12);
    assert!((m.s[1] - nf.model.s[1]).abs().max() < 1e-12);
    assert_eq!(m.t, nf.model.t);
}

#[test]
fn reaction_examples() {
    let m = example_model();
    assert_eq!(eval_reaction(&m, &Vector2::zeros(), 0.3), Vector2::zeros());
    assert!((eval_reaction(&m, &Vector2::new(1.0, 0.0), 0.0) - Vector2::new(3.5, 14.5)).norm() < 1e-15);
    assert!((eval_reaction(&m, &Vector2::new(0.0, 2.0), 0.0) - Vector2::new(-1.5, -6.5)).norm() < 1e-15);
}

#[test]
fn klausmeier_passes_validation_and_turing_check() {
    let nf = klausmeier_normal_form(&KlausmeierSpec::default()).unwrap();
    assert!(validate_model(&nf.model).passed());
    let chk = check_turing(&nf.model, &TuringCheckConfig::default()).unwrap();
    assert!(chk.passed, "{chk:?}");
    // brute-force neutral curve minimizer
    let t = analyze_turing(&nf.model).unwrap();
    let best = (1..20000)
        .map(|i| {
            let k = 2.0 * t.k_c * i as f64 / 20000.0;
            (k, stripeband::turing::max_re_lambda(&nf.model, k))
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((best.0 - t.k_c).abs() < 2.0 * t.k_c / 20000.0);
}

#[test]
fn klausmeier_above_threshold_is_strictly_stable() {
    let nf = klausmeier_normal_form(&KlausmeierSpec::default()).unwrap();
    let mut m = nf.model.clone();
    m.l += nf.model.m * 0.01;
    let chk = check_turing(&m, &TuringCheckConfig::default()).unwrap();
    assert!(!chk.passed && chk.max_re_lambda < 0.0);
}

#[test]
fn klausmeier_kernel_vector_is_svd_null_vector() {
    let nf = klausmeier_normal_form(&KlausmeierSpec::default()).unwrap();
    let t = analyze_turing(&nf.model).unwrap();
    let svd = t.l_hat0().svd(false, true);
    let vt = svd.v_t.unwrap();
    let i = if svd.singular_values[0] < svd.singular_values[1] { 0 } else { 1 };
    let null = Vector2::new(vt[(i, 0)], vt[(i, 1)]);
    assert!(null.dot(&t.e0).abs() > 1.0 - 1e-10);
}

#[test]
fn klausmeier_quadratic_vectors_solve_their_systems() {
    let nf = klausmeier_normal_form(&KlausmeierSpec::default()).unwrap();
    let m = &nf.model;
    let t = analyze_turing(m).unwrap();
    let ex = stripe_expansion(m, &t).unwrap();
    let qee = m.quad(&t.e0, &t.e0);
    let a2 = m.l - m.diffusion() * (4.0 * t.k_c * t.k_c);
    assert!((a2 * ex.q2_vec + qee * 2.0).norm() <= 1e-12 * qee.norm().max(1.0));
    assert!((m.l * ex.q0_vec + qee * 2.0).norm() <= 1e-12 * qee.norm().max(1.0));
}

#[test]
fn dispersion_examples() {
    let m = example_model();
    let z = Complex64::new(0.0, 0.0);
    assert!(dispersion(&m, z, 1.0, 0.0, 0.0, 0.0, 0.0).norm() < 1e-15);
    assert!((dispersion(&m, z, 0.0, 0.0, 0.0, 0.0, 0.0).re - m.l.determinant()).abs() < 1e-14);
    // det([[3 − 1.21, −1], [14, −3.5 − 3.5·1.21]]) = 1.79·(−7.735) + 14
    let v = dispersion(&m, z, 1.1, 0.0, 0.0, 0.0, 0.0);
    assert!((v.re - (1.79 * -7.735 + 14.0)).abs() < 1e-12 && v.im == 0.0);
}

#[test]
fn critical_eigenvalue_along_beta() {
    let a = example();
    let l = critical_eigenvalue(&a.turing, &Parameters::new(0.0, 0.4, 0.0));
    assert!((l.re - 14.0 / 125.0 * 0.16).abs() < 1e-15);
}

#[test]
fn expansion_examples() {
    let a = example();
    let ex = &a.expansion;
    assert!(ex.rho_nl < 0.0);
    // k₀ by contraction: K(E₀) = (−uv², uv²) at E₀ = −(1, 2)/√5 gives (4, −4)/(5√5)
    let s5 = 5f64.sqrt();
    let k = Vector2::new(4.0, -4.0) / (5.0 * s5);
    assert!((ex.k0 - k.dot(&(Vector2::new(-7.0, 1.0) / s5))).abs() < 1e-15);
    assert!(((a.model.diffusion() * ex.w_kappa).dot(&a.turing.e0_star) - 1.4).abs() < 1e-13);
}

#[test]
fn amplitude_and_speed_examples() {
    let a = example();
    let mu = Parameters::new(0.2, 0.7, 0.1);
    let amp = amplitude(&a.turing, &a.expansion, &mu).unwrap().unwrap();
    let want = (-(0.2 + 0.05488 - 0.028) / a.expansion.rho_nl).sqrt();
    assert!((amp - want).abs() < 1e-14);
    // leading-order speed with the α- and κ̃-corrections present
    let c = velocity(&a.turing, &mu);
    assert!((c + 1.4).abs() < 0.2, "{c}");
    assert_eq!(velocity(&a.turing, &Parameters::new(0.0, 0.0, 0.0)), -1.4);
    assert!(amplitude(&a.turing, &a.expansion, &Parameters::new(-0.1, 0.0, 0.0)).unwrap().is_none());
}

#[test]
fn profile_has_two_components_and_mean_a2_q0() {
    let a = example();
    let mu = Parameters::new(0.2, 0.7, 0.1);
    let n = 64;
    let xs: Vec<f64> = (0..n).map(|i| std::f64::consts::TAU * i as f64 / n as f64).collect();
    let p = stripe_profile(&a.turing, &a.expansion, &mu, &xs).unwrap().unwrap();
    let mean = p.iter().fold(Vector2::zeros(), |s, u| s + u) / n as f64;
    let modes = profile_modes(&a.turing, &a.expansion, &mu).unwrap().unwrap();
    assert!((mean - a.expansion.q0_vec * modes.amplitude.powi(2)).norm() < 1e-10);
    assert!(p.iter().any(|u| u[0] > 0.0) && p.iter().any(|u| u[1] < 0.0));
}

#[test]
fn boundary_examples() {
    let a = example();
    let b = boundaries(&a.published, 0.1, 0.0);
    assert!((b.alpha_bif - 0.028).abs() < 1e-15 && (b.alpha_eckhaus - 0.084).abs() < 1e-15);
    assert!((b.alpha_zigzag.unwrap() + 952.0 * 875.0 / 267125.0 * 0.1).abs() < 1e-12);
    let b = boundaries(&a.published, 0.0, 0.7);
    assert!((b.alpha_bif + 0.05488).abs() < 1e-15 && b.alpha_eckhaus == b.alpha_bif);
    let b = boundaries(&a.published, 0.0, 0.0);
    assert_eq!((b.alpha_bif, b.alpha_eckhaus, b.alpha_zigzag), (0.0, 0.0, Some(0.0)));
}

#[test]
fn example_region_labels() {
    let a = example();
    assert_eq!(classify_region(&a.published, &Parameters::new(0.2, 0.0, 0.0)), RegionLabel::Stable);
    assert_eq!(classify_region(&a.published, &Parameters::new(-0.01, 0.0, 0.05)), RegionLabel::NoStripes);
    // the zigzag sign flips across the boundary at α = 0.05
    let kz = -0.05 * 267125.0 / (952.0 * 875.0);
    let sb = &a.published;
    assert!(zigzag_curvature(sb, &Parameters::new(0.05, 0.0, kz - 1e-3)).unwrap() > 0.0);
    assert!(zigzag_curvature(sb, &Parameters::new(0.05, 0.0, kz + 1e-3)).unwrap() < 0.0);
}

#[test]
fn smaller_zigzag_coefficient_produces_an_onset_sliver() {
    let a = example();
    let mut reduced = a.published;
    reduced.rho_betabeta = -26.0 / 625.0;
    let label = |k: f64, sb: &stripeband::SidebandCoefficients| {
        let alpha = boundaries(sb, k, 0.7).alpha_eckhaus + 1e-5;
        classify_region(sb, &Parameters::new(alpha, 0.7, k))
    };
    assert_eq!(label(0.005, &reduced), RegionLabel::ZigzagUnstable);
    assert_eq!(label(0.011, &reduced), RegionLabel::Stable);
    // the published formula itself has no sliver
    assert_eq!(label(0.005, &a.published), RegionLabel::Stable);
}

#[test]
fn closed_form_on_example_without_quadratic_terms() {
    let m = example_model();
    let lin = stripeband::RdModel::new([m.d1, m.d2], m.l, m.m, [Matrix2::zeros(); 2], m.t).unwrap();
    let t = analyze_turing(&lin).unwrap();
    let ex = stripe_expansion(&lin, &t).unwrap();
    // 196·(−7)(10 − 7)/(4·625) and 5·(−7)·9/625
    assert!((rho_betabeta_closed_form(&lin, &t).unwrap() + 1.6464).abs() < 1e-12);
    assert!((zigzag_coefficients(&lin, &t, &ex).rho_betabeta + 0.504).abs() < 1e-12);
}

#[test]
fn klausmeier_boundaries_shift_left_with_advection() {
    let nf = klausmeier_normal_form(&KlausmeierSpec::default()).unwrap();
    let a = Analysis::new(nf.model).unwrap();
    let sb = &a.published;
    let attach = |beta: f64| {
        // root of Z − B near the origin by bisection
        let f = |k: f64| {
            let b = boundaries(sb, k, beta);
            b.alpha_zigzag.unwrap() - b.alpha_bif
        };
        let (mut lo, mut hi) = (-0.5, 0.5);
        assert!(f(lo).signum() != f(hi).signum());
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == f(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    assert!(attach(0.0).abs() < 1e-12);
    assert!(attach(100.0) < -0.05);
}

fn cfg(n: usize) -> OracleConfig {
    OracleConfig { n, ..OracleConfig::default() }
}

#[test]
fn oracle_amplitude_converges_to_expansion() {
    let a = example();
    let errs: Vec<f64> = [0.05, 0.025, 0.0125]
        .iter()
        .map(|&amp| {
            let mu = Parameters::new(-a.expansion.rho_nl * amp * amp, 0.0, 0.0);
            let s = solve_stripe_numeric(&a, &mu, 12, 1e-11).unwrap();
            (s.amplitude(&a.turing.e0_star) - amp).abs() / amp
        })
        .collect();
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
}

#[test]
fn oracle_speed_near_minus_seven_fifths() {
    let a = example();
    let mu = Parameters::new(0.01, 0.0, 0.0);
    let s = solve_stripe_numeric(&a, &mu, 16, 1e-11).unwrap();
    let amp = s.amplitude(&a.turing.e0_star);
    assert!((s.c + 1.4).abs() < 2.0 * amp * amp, "{} {amp}", s.c);
    assert!(!s.truncation_warning);
}

#[test]
fn oracle_tracked_eigenvalues() {
    let a = example();
    let mu = Parameters::new(0.01, 0.3, 0.0);
    let s = solve_stripe_numeric(&a, &mu, 16, 1e-11).unwrap();
    let z = Complex64::new(0.0, 0.0);
    assert!(track_eigenvalue(&a.model, &s, 0.0, 0.0, z).eigenvalue.norm() < 1e-8);
    assert!(track_eigenvalue(&a.model, &s, 0.0, 0.01, z).eigenvalue.im.abs() < 1e-8);
    let g = track_eigenvalue(&a.model, &s, 0.01, 0.0, z).eigenvalue;
    let want = a.turing.k_c * (a.turing.lambda_kappabeta - a.turing.lambda_beta) * 0.3 * 0.01;
    assert!((g.im - want).abs() < 0.1 * want.abs(), "{} {want}", g.im);
}

#[test]
fn oracle_curvatures_match_corrected_coefficients_near_onset() {
    let a = example();
    let mu = Parameters::new(0.01, 0.0, 0.0);
    let s = solve_stripe_numeric(&a, &mu, 16, 1e-11).unwrap();
    let m = measure_sidebands(&a.model, &s, 1e-3);
    let zz = zigzag_curvature(&a.corrected, &mu).unwrap();
    assert!((m.zigzag.coefficient() - zz).abs() < 0.1 * zz.abs(), "{} {zz}", m.zigzag.coefficient());
    assert!(m.eckhaus.coefficient() < 0.0);
    assert!(m.eckhaus.first_derivative_im.abs() < 1e-8);
}

#[test]
fn oracle_eckhaus_sign_at_example_point() {
    let a = example();
    let mu = Parameters::new(0.05, 0.0, 0.05);
    let s = solve_stripe_numeric(&a, &mu, 16, 1e-11).unwrap();
    let fd = curvature_fd(&a.model, &s, Direction::Gamma, 1e-3).coefficient();
    let an = eckhaus_curvature(&a.published, &mu).unwrap();
    assert_eq!(fd.signum(), an.signum(), "{fd} {an}");
}

#[test]
fn oracle_truncation_convergence() {
    let a = example();
    let mu = Parameters::new(0.01, 0.3, 0.02);
    let at = |n: usize| {
        let s = solve_stripe_numeric(&a, &mu, n, 1e-11).unwrap();
        measure_sidebands(&a.model, &s, 1e-3)
    };
    let (m16, m32) = (at(16), at(32));
    let r = |x: f64, y: f64| (x - y).abs() / y.abs();
    assert!(r(m16.zigzag.coefficient(), m32.zigzag.coefficient()) < 0.01);
    assert!(r(m16.eckhaus.coefficient(), m32.eckhaus.coefficient()) < 0.01);
}

#[test]
fn oracle_group_velocity_identity() {
    let a = example();
    let mu = Parameters::new(0.01, 0.3, 0.0);
    let g = group_velocity_check(&a, &mu, &cfg(16), 1e-3).unwrap();
    assert!(g.defect.abs() < 1e-3 * g.c.abs(), "{g:?}");
}

#[test]
fn oracle_full_spectrum_at_stable_point() {
    let a = example();
    let mu = Parameters::new(0.2, 0.7, 0.0);
    let s = solve_stripe_numeric(&a, &mu, 16, 1e-11).unwrap();
    let gammas: Vec<f64> = (-4..=4).map(|i| i as f64 * 0.1).collect();
    let ells: Vec<f64> = (0..=4).map(|i| i as f64 * 0.1).collect();
    let scan = full_spectrum_scan(&a.model, &s, &gammas, &ells);
    assert!(scan.max_re.abs() < 1e-8 && scan.argmax == (0.0, 0.0), "{} {:?}", scan.max_re, scan.argmax);
    assert!(scan.max_re_off_origin < 0.0);
}

#[test]
fn oracle_zigzag_unstable_point_grows_through_small_ell() {
    let a = example();
    let k = -0.02;
    let alpha = boundaries(&a.corrected, k, 0.7).alpha_bif + 2e-3;
    let mu = Parameters::new(alpha, 0.7, k);
    let s = solve_stripe_numeric(&a, &mu, 16, 1e-11).unwrap();
    let scan = full_spectrum_scan(&a.model, &s, &[0.0], &[0.0, 0.02, 0.05]);
    assert!(scan.max_re > 0.0 && scan.argmax.1 > 0.0, "{} {:?}", scan.max_re, scan.argmax);
}

#[test]
fn oracle_zero_stripe_is_stable_off_origin() {
    let a = example();
    let s = solve_stripe_numeric(&a, &Parameters::new(-0.05, 0.0, 0.0), 12, 1e-11).unwrap();
    assert!(s.trivial);
    let scan = full_spectrum_scan(&a.model, &s, &[0.0, 0.2, 0.4], &[0.0, 0.3]);
    assert!(scan.max_re < 0.0);
}
