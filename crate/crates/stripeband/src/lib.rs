//! Turing stripes under weak directional advection.
//!
//! Given a two-component reaction–diffusion–advection system near a Turing
//! instability, this crate computes the critical wavenumber and kernel
//! vectors, every linear and nonlinear expansion coefficient, the stripe
//! amplitude, speed and profile, and the zigzag and Eckhaus sideband
//! boundaries. A Fourier–Galerkin / Floquet–Bloch oracle solves the stripes
//! and their spectra numerically so that each analytic prediction can be
//! checked independently.

pub mod error;
pub mod expansion;
pub mod fixtures;
pub mod ingestion;
pub mod jet;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod sideband;
pub mod turing;

pub use error::{Error, Result};
pub use model::{Parameters, RdModel};
pub use sideband::{CoefficientSet, RegionLabel, SidebandCoefficients};

use expansion::StripeExpansion;
use serde::Serialize;
use turing::TuringData;

/// The full analytic pipeline for one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub model: RdModel,
    pub turing: TuringData,
    pub expansion: StripeExpansion,
    pub published: SidebandCoefficients,
    pub corrected: SidebandCoefficients,
}

impl Analysis {
    /// Runs every analytic stage; fails on the first invalid stage.
    pub fn new(model: RdModel) -> Result<Self> {
        let report = model::validate_model(&model);
        if !report.passed() {
            let names: Vec<String> = report.failures().iter().map(|c| format!("{} ({})", c.name, c.value)).collect();
            return Err(Error::InvalidModel(names.join(", ")));
        }
        let turing = turing::analyze_turing(&model)?;
        let expansion = expansion::stripe_expansion(&model, &turing)?;
        if !expansion.supercritical() {
            return Err(Error::UnsupportedBranch(expansion.rho_nl));
        }
        let published = sideband::zigzag_coefficients(&model, &turing, &expansion);
        let corrected = sideband::corrected_coefficients(&model, &turing, &expansion)?;
        Ok(Analysis { model, turing, expansion, published, corrected })
    }

    pub fn coefficients(&self, set: CoefficientSet) -> &SidebandCoefficients {
        match set {
            CoefficientSet::Published => &self.published,
            CoefficientSet::Corrected => &self.corrected,
        }
    }
}
