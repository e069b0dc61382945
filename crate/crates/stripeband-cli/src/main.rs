mod grid;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use stripeband::expansion::{motion_direction, stripe_profile, stripe_state};
use stripeband::ingestion::{klausmeier_normal_form, model_to_json, parse_model_file, KlausmeierSpec};
use stripeband::model::validate_model;
use stripeband::oracle::{measure_sidebands, oracle_point, solve_stripe_numeric, OracleConfig, OracleLabel};
use stripeband::sideband::{
    analytic_map, boundaries, classify_region, eckhaus_curvature, eckhaus_drift, zigzag_curvature, zigzag_scenario,
};
use stripeband::turing::{check_turing, TuringCheckConfig};
use stripeband::{Analysis, CoefficientSet, Parameters, RdModel};

use grid::{fmt_f64, parse_grid, parse_mu, UsageError};

#[derive(Parser)]
#[command(name = "stripeband", version, about = "Turing stripes under weak advection: coefficients, boundaries and Bloch checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Model file (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Sideband coefficient set.
    #[arg(long, default_value = "published")]
    coefficients: CoefficientSet,
}

#[derive(Args, Clone, Copy)]
struct OracleArgs {
    /// Fourier truncation order.
    #[arg(long, default_value_t = stripeband::oracle::DEFAULT_N)]
    n: usize,
    /// Newton residual tolerance.
    #[arg(long, default_value_t = stripeband::oracle::DEFAULT_TOL)]
    tol: f64,
    /// Coarse finite-difference step in γ and ℓ.
    #[arg(long, default_value_t = stripeband::oracle::DEFAULT_H)]
    h: f64,
}

impl OracleArgs {
    fn config(&self) -> Result<OracleConfig, UsageError> {
        if self.n < 8 {
            return Err(UsageError(format!("--n must be at least 8, got {}", self.n)));
        }
        if !(self.tol > 0.0 && self.h > 0.0) {
            return Err(UsageError("--tol and --h must be positive".into()));
        }
        Ok(OracleConfig { n: self.n, tol: self.tol, h: self.h })
    }
}

#[derive(Subcommand)]
enum Command {
    /// JSON report of the linear data, expansion, coefficients and cross-checks.
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
        /// β used for the zigzag scenario.
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// CSV of the bifurcation, Eckhaus and zigzag curves over a κ̃ grid.
    Boundaries {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        beta: f64,
        /// κ̃ grid, start:stop:step.
        #[arg(long, allow_hyphen_values = true)]
        kappa: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// CSV of the stripe profile over one period.
    Stripe {
        #[command(flatten)]
        model: ModelArgs,
        /// alpha,beta,kappa
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Use the Galerkin solution instead of the leading-order expansion.
        #[arg(long)]
        numeric: bool,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Analytic against oracle curvatures at a list of μ.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        /// alpha,beta,kappa; repeat for several points.
        #[arg(long, required = true, allow_hyphen_values = true)]
        mu: Vec<String>,
        /// Relative error accepted in the `within_threshold` column.
        #[arg(long, default_value_t = 0.1)]
        threshold: f64,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Analytic and oracle region maps with an agreement summary.
    Scan {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        beta: f64,
        /// α grid, start:stop:step.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// κ̃ grid, start:stop:step.
        #[arg(long, allow_hyphen_values = true)]
        kappa: String,
        /// Also run the Bloch oracle on every grid point.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        oracle_args: OracleArgs,
        /// Output directory.
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Klausmeier normal form at its Turing threshold.
    Klausmeier {
        #[arg(long, default_value_t = 500.0)]
        d: f64,
        #[arg(long, default_value_t = 0.45)]
        m: f64,
        /// Precipitation; α̌ = a − a_T is reported for it.
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        /// Where to write the model file.
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Debug)]
struct ValidationFailure(serde_json::Value);

impl std::fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "model failed validation")
    }
}

impl std::error::Error for ValidationFailure {}

fn load_model(path: &Path) -> Result<(RdModel, Option<String>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = parse_model_file(&text)?;
    Ok((file.model, file.name))
}

fn load_analysis(args: &ModelArgs) -> Result<(Analysis, Option<String>)> {
    let (model, name) = load_model(&args.model)?;
    let report = validate_model(&model);
    if !report.passed() {
        return Err(ValidationFailure(serde_json::to_value(&report)?).into());
    }
    Ok((Analysis::new(model)?, name))
}

fn sink(output: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match output {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(output: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut w = sink(output)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_f64)
}

fn analyze(args: &ModelArgs, beta: f64, output: &Option<PathBuf>) -> Result<()> {
    let (model, name) = load_model(&args.model)?;
    let report = validate_model(&model);
    if !report.passed() {
        return Err(ValidationFailure(serde_json::to_value(&report)?).into());
    }
    let turing_check = check_turing(&model, &TuringCheckConfig::default())?;
    let a = Analysis::new(model)?;
    let sb = a.coefficients(args.coefficients);
    let scenario = zigzag_scenario(sb, beta);
    let mut check = serde_json::to_value(&turing_check)?;
    if let Some(obj) = check.as_object_mut() {
        obj.remove("samples");
    }
    let value = json!({
        "name": name,
        "validation": report,
        "turing_check": check,
        "turing": a.turing,
        "expansion": a.expansion,
        "motion_direction": motion_direction(&a.model, &a.turing),
        "coefficient_set": args.coefficients,
        "coefficients": sb,
        "published": a.published,
        "corrected": a.corrected,
        "zigzag_scenario": { "beta": beta, "scenario": scenario.tag() },
        "max_cross_check_rel_diff": a.turing.max_cross_check_rel_diff(),
    });
    write_json(output, &value)
}

fn boundaries_cmd(args: &ModelArgs, beta: f64, kappa: &str, output: &Option<PathBuf>) -> Result<()> {
    let kappas = parse_grid(kappa)?;
    let (a, _) = load_analysis(args)?;
    let sb = a.coefficients(args.coefficients);
    let mut w = csv::Writer::from_writer(sink(output)?);
    w.write_record(["kappa_tilde", "alpha_bifurcation", "alpha_eckhaus", "alpha_zigzag", "zigzag_kappa"])?;
    for k in kappas {
        let b = boundaries(sb, k, beta);
        w.write_record([fmt_f64(k), fmt_f64(b.alpha_bif), fmt_f64(b.alpha_eckhaus), opt(b.alpha_zigzag), opt(b.zigzag_kappa)])?;
    }
    w.flush()?;
    Ok(())
}

fn stripe_cmd(args: &ModelArgs, mu: &str, points: usize, numeric: bool, oracle: &OracleArgs, output: &Option<PathBuf>) -> Result<()> {
    let [al, be, ka] = parse_mu(mu)?;
    if points < 2 {
        return Err(UsageError("--points must be at least 2".into()).into());
    }
    let cfg = oracle.config()?;
    let (a, _) = load_analysis(args)?;
    let mu = Parameters::new(al, be, ka);
    let xs: Vec<f64> = (0..points).map(|i| std::f64::consts::TAU * i as f64 / (points - 1) as f64).collect();
    let (profile, c, amp) = if numeric {
        let s = solve_stripe_numeric(&a, &mu, cfg.n, cfg.tol)?;
        if s.trivial {
            return Err(stripeband::Error::NoStripe.into());
        }
        (s.profile(&xs), s.c, s.amplitude(&a.turing.e0_star))
    } else {
        let state = stripe_state(&a.turing, &a.expansion, &mu)?.ok_or(stripeband::Error::NoStripe)?;
        let p = stripe_profile(&a.turing, &a.expansion, &mu, &xs)?.ok_or(stripeband::Error::NoStripe)?;
        (p, state.c, state.amplitude)
    };
    let mut w = csv::Writer::from_writer(sink(output)?);
    w.write_record(["x", "u", "v", "amplitude", "c"])?;
    for (x, u) in xs.iter().zip(&profile) {
        w.write_record([fmt_f64(*x), fmt_f64(u[0]), fmt_f64(u[1]), fmt_f64(amp), fmt_f64(c)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct VerifyRow {
    alpha: f64,
    beta: f64,
    kappa_tilde: f64,
    amplitude_analytic: f64,
    amplitude_numeric: f64,
    c_analytic: f64,
    c_numeric: f64,
    zigzag_analytic: f64,
    zigzag_oracle: f64,
    zigzag_rel_error: f64,
    eckhaus_analytic: f64,
    eckhaus_oracle: f64,
    eckhaus_rel_error: f64,
    drift_analytic: f64,
    drift_oracle: f64,
    drift_rel_error: f64,
    oracle_unreliable: bool,
    truncation_warning: bool,
    within_threshold: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn verify_point(a: &Analysis, set: CoefficientSet, mu: Parameters, cfg: &OracleConfig, threshold: f64) -> Result<VerifyRow> {
    let sb = a.coefficients(set);
    let state = stripe_state(&a.turing, &a.expansion, &mu)?.ok_or(stripeband::Error::NoStripe)?;
    let stripe = solve_stripe_numeric(a, &mu, cfg.n, cfg.tol)?;
    if stripe.trivial {
        return Err(stripeband::Error::NoStripe.into());
    }
    let s = measure_sidebands(&a.model, &stripe, cfg.h);
    let zz = zigzag_curvature(sb, &mu)?;
    let eh = eckhaus_curvature(sb, &mu)?;
    let drift = eckhaus_drift(sb, mu.beta);
    let (zo, eo, dro) = (s.zigzag.coefficient(), s.eckhaus.coefficient(), s.eckhaus.first_derivative_im);
    let (zr, er) = (rel(zo, zz), rel(eo, eh));
    let dr = if mu.beta == 0.0 { dro.abs() } else { rel(dro, drift) };
    Ok(VerifyRow {
        alpha: mu.alpha,
        beta: mu.beta,
        kappa_tilde: mu.kappa_tilde,
        amplitude_analytic: state.amplitude,
        amplitude_numeric: stripe.amplitude(&a.turing.e0_star),
        c_analytic: state.c,
        c_numeric: stripe.c,
        zigzag_analytic: zz,
        zigzag_oracle: zo,
        zigzag_rel_error: zr,
        eckhaus_analytic: eh,
        eckhaus_oracle: eo,
        eckhaus_rel_error: er,
        drift_analytic: drift,
        drift_oracle: dro,
        drift_rel_error: dr,
        oracle_unreliable: s.zigzag.unreliable || s.eckhaus.unreliable,
        truncation_warning: stripe.truncation_warning,
        within_threshold: zr <= threshold && er <= threshold && dr <= threshold,
    })
}

fn verify(args: &ModelArgs, mus: &[String], threshold: f64, oracle: &OracleArgs, output: &Option<PathBuf>) -> Result<()> {
    let points: Vec<[f64; 3]> = mus.iter().map(|m| parse_mu(m)).collect::<Result<_, _>>()?;
    let cfg = oracle.config()?;
    let (a, _) = load_analysis(args)?;
    let rows: Vec<Result<VerifyRow>> = points
        .par_iter()
        .map(|&[al, be, ka]| verify_point(&a, args.coefficients, Parameters::new(al, be, ka), &cfg, threshold))
        .collect();
    let mut w = csv::Writer::from_writer(sink(output)?);
    w.write_record([
        "alpha", "beta", "kappa_tilde", "amplitude_analytic", "amplitude_numeric", "c_analytic", "c_numeric",
        "zigzag_analytic", "zigzag_oracle", "zigzag_rel_error", "eckhaus_analytic", "eckhaus_oracle",
        "eckhaus_rel_error", "drift_analytic", "drift_oracle", "drift_rel_error", "oracle_unreliable",
        "truncation_warning", "within_threshold",
    ])?;
    for row in rows {
        let r = row?;
        let nums = [
            r.alpha, r.beta, r.kappa_tilde, r.amplitude_analytic, r.amplitude_numeric, r.c_analytic, r.c_numeric,
            r.zigzag_analytic, r.zigzag_oracle, r.zigzag_rel_error, r.eckhaus_analytic, r.eckhaus_oracle,
            r.eckhaus_rel_error, r.drift_analytic, r.drift_oracle, r.drift_rel_error,
        ];
        let mut rec: Vec<String> = nums.iter().map(|&x| fmt_f64(x)).collect();
        rec.extend([r.oracle_unreliable, r.truncation_warning, r.within_threshold].map(|b| b.to_string()));
        w.write_record(&rec)?;
        w.flush()?;
    }
    w.flush()?;
    Ok(())
}

fn scan(
    args: &ModelArgs,
    beta: f64,
    alpha: &str,
    kappa: &str,
    run_oracle: bool,
    oracle: &OracleArgs,
    dir: &Path,
) -> Result<()> {
    let alphas = parse_grid(alpha)?;
    let kappas = parse_grid(kappa)?;
    let cfg = oracle.config()?;
    let (a, _) = load_analysis(args)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let sb = a.coefficients(args.coefficients);

    let map = analytic_map(sb, &alphas, &kappas, beta);
    let path = dir.join("analytic_map.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["kappa_tilde", "alpha", "label"])?;
    for p in &map {
        w.write_record([fmt_f64(p.kappa_tilde), fmt_f64(p.alpha), p.label.as_str().to_string()])?;
    }
    w.flush()?;

    let mut summary = json!({
        "beta": beta,
        "coefficient_set": args.coefficients,
        "scenario": zigzag_scenario(sb, beta).tag(),
        "points": map.len(),
    });
    if run_oracle {
        let path = dir.join("oracle_map.csv");
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record([
            "kappa_tilde", "alpha", "label", "analytic_label", "zigzag_curvature", "eckhaus_curvature", "max_re_lambda",
            "amplitude", "c",
        ])?;
        let (mut agree, mut converged, mut unconverged) = (0usize, 0usize, 0usize);
        // one α row at a time so that completed rows reach the disk
        for &al in &alphas {
            let row: Vec<_> = kappas.par_iter().map(|&k| oracle_point(&a, &Parameters::new(al, beta, k), &cfg)).collect();
            for o in row {
                let analytic = classify_region(sb, &Parameters::new(o.alpha, beta, o.kappa_tilde));
                match o.label {
                    OracleLabel::NoConvergence => unconverged += 1,
                    OracleLabel::Region(l) => {
                        converged += 1;
                        agree += usize::from(l == analytic);
                    }
                }
                w.write_record([
                    fmt_f64(o.kappa_tilde),
                    fmt_f64(o.alpha),
                    o.label.as_str().to_string(),
                    analytic.as_str().to_string(),
                    fmt_f64(o.zz_curvature),
                    fmt_f64(o.eh_curvature),
                    fmt_f64(o.max_re_lambda),
                    fmt_f64(o.a_numeric),
                    fmt_f64(o.c_numeric),
                ])?;
            }
            w.flush()?;
        }
        summary["oracle"] = json!({
            "n": cfg.n,
            "converged": converged,
            "unconverged": unconverged,
            "agree": agree,
            "agreement": if converged > 0 { agree as f64 / converged as f64 } else { f64::NAN },
        });
    }
    write_json(&Some(dir.join("summary.json")), &summary)?;
    write_json(&None, &summary)
}

fn klausmeier(d: f64, m: f64, a: Option<f64>, beta: f64, output: &Path) -> Result<()> {
    let spec = KlausmeierSpec { d, m, a: a.unwrap_or(f64::NAN), beta };
    let nf = klausmeier_normal_form(&spec)?;
    let notes = format!(
        "Klausmeier normal form at a_T = {} (d = {d}, m = {m}); alpha_check = a - a_T",
        nf.a_t
    );
    let text = model_to_json(&nf.model, Some("klausmeier"), Some(&notes));
    fs::write(output, text).with_context(|| format!("writing {}", output.display()))?;
    let report = json!({
        "d": d,
        "m": m,
        "beta": beta,
        "a_t": nf.a_t,
        "lambda_m": nf.lambda_m,
        "u_plus": nf.states.u_plus,
        "v_plus": nf.states.v_plus,
        "a": a,
        "alpha_check": a.map(|_| nf.alpha_check),
        "model_file": output.display().to_string(),
    });
    write_json(&None, &report)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { model, beta, output } => analyze(&model, beta, &output),
        Command::Boundaries { model, beta, kappa, output } => boundaries_cmd(&model, beta, &kappa, &output),
        Command::Stripe { model, mu, points, numeric, oracle, output } => {
            stripe_cmd(&model, &mu, points, numeric, &oracle, &output)
        }
        Command::Verify { model, mu, threshold, oracle, output } => verify(&model, &mu, threshold, &oracle, &output),
        Command::Scan { model, beta, alpha, kappa, oracle, oracle_args, output_dir } => {
            scan(&model, beta, &alpha, &kappa, oracle, &oracle_args, &output_dir)
        }
        Command::Klausmeier { d, m, a, beta, output } => klausmeier(d, m, a, beta, &output),
    }
}

/// Exit code and error kind of a failure.
fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    if err.downcast_ref::<ValidationFailure>().is_some() || err.downcast_ref::<UsageError>().is_some() {
        return (2, "validation");
    }
    if let Some(e) = err.downcast_ref::<stripeband::Error>() {
        return if e.is_validation() { (2, "validation") } else { (3, "numerical") };
    }
    if err.chain().any(|c| c.is::<io::Error>() || c.is::<csv::Error>()) {
        return (4, "io");
    }
    (3, "numerical")
}

fn configure_threads() -> Result<(), UsageError> {
    if let Ok(v) = std::env::var("STRIPEBAND_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| UsageError(format!("STRIPEBAND_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| UsageError(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().map_err(anyhow::Error::from).and_then(|()| run(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, kind) = classify(&err);
            let mut body = json!({ "error": kind, "exit_code": code, "message": format!("{err:#}") });
            if let Some(v) = err.downcast_ref::<ValidationFailure>() {
                body["report"] = v.0.clone();
            }
            eprintln!("{body}");
            ExitCode::from(code)
        }
    }
}
