//! Numerical laboratory for Kähler curvature operators: identity sweeps,
//! Calabi spectra, degree thresholds and vanishing certificates.

// `!(x < tol)` is deliberate throughout: NaN must count as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod harness;
pub mod input;
pub mod report;
pub mod space;
pub mod suite;

use calabi_core::certify::CertifyError;
use calabi_core::curvature::CurvatureError;
use calabi_core::model_spaces::ModelError;
use calabi_core::spectral::SpectralError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("input schema: {0}")]
    Schema(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Parse(#[from] space::ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("not a valid curvature tensor: {0}")]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
}

impl LabError {
    /// Usage and input errors exit with 2; everything else is a runtime failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Io { .. } | LabError::Schema(_) | LabError::Config(_) | LabError::Parse(_) => 2,
            LabError::Model(ModelError::Descriptor(_)) | LabError::Certify(_) => 2,
            _ => 1,
        }
    }
}
