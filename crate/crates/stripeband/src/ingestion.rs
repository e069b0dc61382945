//! Model files and the Klausmeier normal form.
//!
//! A model file is a JSON document:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "name": "example",
//!   "diffusion": [1, "7/2"],
//!   "linear": [3, -1, 14, "-7/2"],
//!   "unfolding": "identity",
//!   "quadratic": [[[0.5, 0], [0, 0.125]], [[0.5, 0], [0, 0.125]]],
//!   "cubic": []
//! }
//! ```
//!
//! Matrices are row-major. `cubic` holds two arrays of eight entries, entry
//! `4j + 2k + l` being T_i[j][k][l]. Any coefficient may be written as a
//! rational string `"p/q"`.

use nalgebra::Matrix2;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{RdModel, Tensor3};
use crate::turing::analyze_turing;

pub const SCHEMA_VERSION: u64 = 1;

const KNOWN_KEYS: [&str; 8] = ["schema_version", "name", "notes", "diffusion", "linear", "unfolding", "quadratic", "cubic"];
const TENSOR_SYMMETRY_TOL: f64 = 1e-12;

/// A parsed model file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub schema_version: u64,
    pub name: Option<String>,
    pub notes: Option<String>,
    pub model: RdModel,
}

fn key_line(text: &str, key: &str) -> usize {
    let pat = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&pat)).map_or(0, |i| i + 1)
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Parse { line: key_line(self.text, key), message: message.into() }
    }

    fn number(&self, key: &str, path: &str, v: &Value) -> Result<f64> {
        let x = match v {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => parse_rational(s),
            _ => None,
        };
        match x {
            Some(x) if x.is_finite() => Ok(x),
            Some(_) => Err(self.err(key, format!("{path} is not finite"))),
            None => Err(self.err(key, format!("{path} is not a number: {v}"))),
        }
    }

    fn array<'v>(&self, key: &str, path: &str, v: &'v Value, len: usize) -> Result<&'v Vec<Value>> {
        match v.as_array() {
            Some(a) if a.len() == len => Ok(a),
            Some(a) => Err(self.err(key, format!("{path} has {} entries, expected {len}", a.len()))),
            None => Err(self.err(key, format!("{path} must be an array"))),
        }
    }

    fn numbers(&self, key: &str, path: &str, v: &Value, len: usize) -> Result<Vec<f64>> {
        self.array(key, path, v, len)?
            .iter()
            .enumerate()
            .map(|(i, x)| self.number(key, &format!("{path}[{i}]"), x))
            .collect()
    }

    fn required<'v>(&self, obj: &'v Map<String, Value>, key: &str) -> Result<&'v Value> {
        obj.get(key).ok_or_else(|| Error::Parse { line: 1, message: format!("missing field \"{key}\"") })
    }

    fn matrix(&self, key: &str, path: &str, v: &Value) -> Result<Matrix2<f64>> {
        let x = self.numbers(key, path, v, 4)?;
        Ok(Matrix2::new(x[0], x[1], x[2], x[3]))
    }

    fn nested_matrix(&self, key: &str, path: &str, v: &Value) -> Result<Matrix2<f64>> {
        let rows = self.array(key, path, v, 2)?;
        let r0 = self.numbers(key, &format!("{path}[0]"), &rows[0], 2)?;
        let r1 = self.numbers(key, &format!("{path}[1]"), &rows[1], 2)?;
        Ok(Matrix2::new(r0[0], r0[1], r1[0], r1[1]))
    }
}

/// Parses `"p/q"` or a plain decimal.
pub fn parse_rational(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            (q != 0.0).then_some(p / q)
        }
        None => s.parse().ok(),
    }
}

/// Parses a model file, checking its schema and the symmetry of Q and K.
pub fn parse_model_file(text: &str) -> Result<ModelFile> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
    let obj = root.as_object().ok_or(Error::Parse { line: 1, message: "top level must be an object".into() })?;
    let cx = Ctx { text };
    if let Some(k) = obj.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(cx.err(k, format!("unknown field \"{k}\"")));
    }
    let schema_version = match obj.get("schema_version") {
        None => SCHEMA_VERSION,
        Some(v) => v.as_u64().ok_or_else(|| cx.err("schema_version", "schema_version must be an integer"))?,
    };
    if schema_version != SCHEMA_VERSION {
        return Err(cx.err("schema_version", format!("unsupported schema_version {schema_version}")));
    }
    let text_field = |k: &str| -> Result<Option<String>> {
        match obj.get(k) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(cx.err(k, format!("{k} must be a string"))),
        }
    };
    let name = text_field("name")?;
    let notes = text_field("notes")?;

    let d = cx.numbers("diffusion", "diffusion", cx.required(obj, "diffusion")?, 2)?;
    let l = cx.matrix("linear", "linear", cx.required(obj, "linear")?)?;
    let m = match cx.required(obj, "unfolding")? {
        Value::String(s) if s == "identity" => Matrix2::identity(),
        Value::String(s) => return Err(cx.err("unfolding", format!("unknown unfolding token \"{s}\""))),
        v => cx.matrix("unfolding", "unfolding", v)?,
    };

    let mut s = [Matrix2::zeros(); 2];
    match obj.get("quadratic") {
        None => {}
        Some(v) if v.as_array().is_some_and(|a| a.is_empty()) => {}
        Some(v) => {
            let blocks = cx.array("quadratic", "quadratic", v, 2)?;
            for (i, b) in blocks.iter().enumerate() {
                let si = cx.nested_matrix("quadratic", &format!("quadratic[{i}]"), b)?;
                if si[(0, 1)] != si[(1, 0)] {
                    return Err(cx.err(
                        "quadratic",
                        format!(
                            "quadratic[{i}] (S{}) is not symmetric: entry [0][1] = {} differs from [1][0] = {}",
                            i + 1,
                            si[(0, 1)],
                            si[(1, 0)]
                        ),
                    ));
                }
                s[i] = si;
            }
        }
    }

    let mut t: [Tensor3; 2] = [[[[0.0; 2]; 2]; 2]; 2];
    match obj.get("cubic") {
        None => {}
        Some(v) if v.as_array().is_some_and(|a| a.is_empty()) => {}
        Some(v) => {
            let blocks = cx.array("cubic", "cubic", v, 2)?;
            for (i, b) in blocks.iter().enumerate() {
                let x = cx.numbers("cubic", &format!("cubic[{i}]"), b, 8)?;
                for (idx, val) in x.iter().enumerate() {
                    t[i][idx >> 2][(idx >> 1) & 1][idx & 1] = *val;
                }
                for idx in 0..8 {
                    let (j, k, l) = (idx >> 2, (idx >> 1) & 1, idx & 1);
                    let sorted = {
                        let mut a = [j, k, l];
                        a.sort_unstable();
                        a
                    };
                    let canon = t[i][sorted[0]][sorted[1]][sorted[2]];
                    if (t[i][j][k][l] - canon).abs() > TENSOR_SYMMETRY_TOL * canon.abs().max(1.0) {
                        return Err(cx.err(
                            "cubic",
                            format!(
                                "cubic[{i}] (T{}) is not symmetric: entry [{j}][{k}][{l}] = {} differs from [{}][{}][{}] = {}",
                                i + 1,
                                t[i][j][k][l],
                                sorted[0],
                                sorted[1],
                                sorted[2],
                                canon
                            ),
                        ));
                    }
                }
            }
        }
    }

    let model = RdModel::new([d[0], d[1]], l, m, s, t).map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
    Ok(ModelFile { schema_version, name, notes, model })
}

/// Parses a model file and returns its model.
pub fn parse_model(text: &str) -> Result<RdModel> {
    parse_model_file(text).map(|f| f.model)
}

fn row_major(m: &Matrix2<f64>) -> Value {
    Value::from(vec![m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]])
}

/// Serializes a model in the file format; floats round-trip exactly.
pub fn model_to_json(model: &RdModel, name: Option<&str>, notes: Option<&str>) -> String {
    let mut obj = Map::new();
    obj.insert("schema_version".into(), SCHEMA_VERSION.into());
    if let Some(n) = name {
        obj.insert("name".into(), n.into());
    }
    if let Some(n) = notes {
        obj.insert("notes".into(), n.into());
    }
    obj.insert("diffusion".into(), Value::from(vec![model.d1, model.d2]));
    obj.insert("linear".into(), row_major(&model.l));
    obj.insert("unfolding".into(), if model.is_m_identity { "identity".into() } else { row_major(&model.m) });
    let quad: Vec<Value> = model
        .s
        .iter()
        .map(|s| Value::from(vec![vec![s[(0, 0)], s[(0, 1)]], vec![s[(1, 0)], s[(1, 1)]]]))
        .collect();
    obj.insert("quadratic".into(), quad.into());
    let cubic: Vec<Value> = model
        .t
        .iter()
        .map(|t| Value::from(t.iter().flatten().flatten().copied().collect::<Vec<f64>>()))
        .collect();
    obj.insert("cubic".into(), cubic.into());
    let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("model serializes");
    s.push('\n');
    s
}

/// Parameters of the extended Klausmeier model
/// u_t = dΔu + βu_x + a − u − uv², v_t = Δv − mv + uv².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KlausmeierSpec {
    pub d: f64,
    pub m: f64,
    pub a: f64,
    pub beta: f64,
}

impl Default for KlausmeierSpec {
    fn default() -> Self {
        KlausmeierSpec { d: 500.0, m: 0.45, a: 0.9, beta: 0.0 }
    }
}

/// The two vegetated equilibria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomogeneousStates {
    pub u_plus: f64,
    pub v_plus: f64,
    pub u_minus: f64,
    pub v_minus: f64,
}

pub fn homogeneous_states(spec: &KlausmeierSpec) -> Result<HomogeneousStates> {
    let (a, m) = (spec.a, spec.m);
    if !(m > 0.0) || !(spec.d > 0.0) {
        return Err(Error::Precondition(format!("Klausmeier needs d > 0 and m > 0 (d = {}, m = {m})", spec.d)));
    }
    let disc = a * a - 4.0 * m * m;
    if !(a >= 2.0 * m) || disc < 0.0 {
        return Err(Error::Precondition(format!("no vegetated state: a = {a} < 2m = {}", 2.0 * m)));
    }
    let s = disc.sqrt();
    Ok(HomogeneousStates {
        u_plus: 2.0 * m * m / (a + s),
        v_plus: (a + s) / (2.0 * m),
        u_minus: 2.0 * m * m / (a - s),
        v_minus: (a - s) / (2.0 * m),
    })
}

/// Linearization L̃(a) at (u₊, v₊).
pub fn klausmeier_linear(m: f64, v_plus: f64) -> Matrix2<f64> {
    Matrix2::new(-1.0 - v_plus * v_plus, -2.0 * m, v_plus * v_plus, m)
}

/// ∂_a L̃(a) by the chain rule through v₊(a).
pub fn klausmeier_unfolding(spec: &KlausmeierSpec) -> Result<Matrix2<f64>> {
    let st = homogeneous_states(spec)?;
    let s = (spec.a * spec.a - 4.0 * spec.m * spec.m).sqrt();
    if s == 0.0 {
        return Err(Error::Precondition("v₊(a) is not differentiable at a = 2m".into()));
    }
    let dv = (1.0 + spec.a / s) / (2.0 * spec.m);
    let w = 2.0 * st.v_plus * dv;
    Ok(Matrix2::new(-w, 0.0, w, 0.0))
}

/// Minimum over k of det(−k²D + L̃(a)); negative means Turing unstable.
fn criticality(spec: &KlausmeierSpec, a: f64) -> Result<f64> {
    let st = homogeneous_states(&KlausmeierSpec { a, ..*spec })?;
    let l = klausmeier_linear(spec.m, st.v_plus);
    let (d1, d2) = (spec.d, 1.0);
    let num = d1 * l[(1, 1)] + d2 * l[(0, 0)];
    let det = l.determinant();
    Ok(if num > 0.0 { det - num * num / (4.0 * d1 * d2) } else { det })
}

/// Turing threshold a_T by bisection on `[lo, hi]` to tolerance `tol`.
pub fn turing_threshold(spec: &KlausmeierSpec, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (criticality(spec, lo)?, criticality(spec, hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket(format!("criticality has no sign change on [{lo}, {hi}] ({flo:e}, {fhi:e})")));
    }
    let rising = fhi > flo;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f = criticality(spec, mid)?;
        if (f > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Klausmeier model transformed to normal form at its Turing threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlausmeierNormalForm {
    pub model: RdModel,
    pub a_t: f64,
    pub lambda_m: f64,
    pub states: HomogeneousStates,
    /// α̌ = a − a_T for the requested precipitation.
    pub alpha_check: f64,
}

/// Shifts (u₊, v₊) to the origin at a = a_T, with L = L̃(a_T), M = ∂_aL̃(a_T),
/// Q from S₂ = [[0, v₊], [v₊, u₊]] = −S₁ and K = (−uv², uv²).
pub fn klausmeier_normal_form(spec: &KlausmeierSpec) -> Result<KlausmeierNormalForm> {
    let a_t = turing_threshold(spec, 2.0 * spec.m, 10.0 * spec.m, 1e-12)?;
    let at = KlausmeierSpec { a: a_t, ..*spec };
    let states = homogeneous_states(&at)?;
    let l = klausmeier_linear(spec.m, states.v_plus);
    let m = klausmeier_unfolding(&at)?;
    let s2 = Matrix2::new(0.0, states.v_plus, states.v_plus, states.u_plus);
    let model = RdModel::new([spec.d, 1.0], l, m, [-s2, s2], crate::fixtures::minus_uv2_tensors())?;
    let lambda_m = analyze_turing(&model)?.lambda_m;
    Ok(KlausmeierNormalForm { model, a_t, lambda_m, states, alpha_check: spec.a - a_t })
}
