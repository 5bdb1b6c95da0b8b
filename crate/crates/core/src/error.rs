use thiserror::Error;

use crate::bellman::ViTrace;
use crate::model::ValidationReport;

pub type Result<T> = std::result::Result<T, SspError>;

#[derive(Debug, Error)]
pub enum SspError {
    #[error("invalid model: {0}")]
    Validation(ValidationReport),

    #[error("value iteration did not converge after {} sweeps", .trace.len())]
    NonConvergence { trace: Box<ViTrace> },

    #[error("generator produced an invalid branch at `{token}`: {reason}")]
    Generator { token: String, reason: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("infeasible policy: control {control} is not available at state {state}")]
    Infeasible { state: String, control: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SspError {
    pub fn parameter(msg: impl Into<String>) -> Self {
        SspError::Parameter(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        SspError::Contract(msg.into())
    }
}
