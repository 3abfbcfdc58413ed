use thiserror::Error;

use crate::model::Regime;

/// Errors raised by the analysis, evolution and solver routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum QhdError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported regime {regime:?}: {reason}")]
    UnsupportedRegime { regime: Regime, reason: String },

    #[error("accuracy error in {context}: estimated relative error {estimate:e} exceeds {tolerance:e}")]
    Accuracy {
        context: String,
        estimate: f64,
        tolerance: f64,
    },

    #[error("constants check failed: {0}")]
    Constants(String),

    #[error("positivity violated at t={t}: total density {density:e} at x={x} below floor {floor:e}")]
    Positivity { t: f64, x: f64, density: f64, floor: f64 },

    #[error("non-finite value encountered at t={t} in {field}")]
    NonFinite { t: f64, field: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, QhdError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(QhdError::Domain(msg.into()))
}
