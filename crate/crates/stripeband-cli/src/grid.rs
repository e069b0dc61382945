use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn number(s: &str, what: &str) -> Result<f64, UsageError> {
    let x: f64 = s.trim().parse().map_err(|_| UsageError(format!("{what}: `{s}` is not a number")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(UsageError(format!("{what}: `{s}` is not finite")))
    }
}

/// Parses `start:stop:step` (endpoints included within half a step) or a single value.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, UsageError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![number(v, "grid")?]),
        [a, b, h] => {
            let (a, b, h) = (number(a, "grid start")?, number(b, "grid stop")?, number(h, "grid step")?);
            if !(h > 0.0) {
                return Err(UsageError(format!("grid step must be positive, got {h}")));
            }
            if b < a {
                return Err(UsageError(format!("grid stop {b} is below start {a}")));
            }
            let n = ((b - a) / h + 0.5).floor() as usize + 1;
            if n > 10_000_000 {
                return Err(UsageError(format!("grid has {n} points")));
            }
            Ok((0..n).map(|i| a + i as f64 * h).collect())
        }
        _ => Err(UsageError(format!("grid `{s}` must be start:stop:step or a single value"))),
    }
}

/// Parses `alpha,beta,kappa`.
pub fn parse_mu(s: &str) -> Result<[f64; 3], UsageError> {
    let v: Vec<f64> = s.split(',').map(|x| number(x, "mu")).collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b, k] => Ok([*a, *b, *k]),
        _ => Err(UsageError(format!("mu `{s}` must be alpha,beta,kappa"))),
    }
}

/// Fixed 17-significant-digit formatting.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}
