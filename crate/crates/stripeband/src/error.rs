//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures raised by the analysis pipeline and the oracle.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("not at a Turing instability: {0}")]
    NotTuring(String),
    #[error("degenerate normalization: {0}")]
    DegenerateNormalization(String),
    #[error("degenerate unfolding: |lambda_M| = {0:e} is below tolerance")]
    DegenerateUnfolding(f64),
    #[error("degenerate Turing point: {0}")]
    DegenerateTuring(String),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("unsupported branch: rho_nl = {0} is not negative (subcritical case)")]
    UnsupportedBranch(f64),
    #[error("no stripe exists at the requested parameters")]
    NoStripe,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("Newton iteration did not converge (final residual {residual:e} after {iterations} iterations)")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("bracket error: {0}")]
    Bracket(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// True for errors caused by bad input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidModel(_)
                | Error::NotTuring(_)
                | Error::Precondition(_)
                | Error::Config(_)
                | Error::Parse { .. }
                | Error::UnsupportedBranch(_)
                | Error::NoStripe
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
