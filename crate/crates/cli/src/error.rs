use hv_core::belief::BeliefError;
use hv_core::engine::EngineError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("cap exceeded: {0}")]
    Cap(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 10,
            CliError::Validation(_) => 11,
            CliError::Cap(_) => 12,
            CliError::Internal(_) => 13,
            CliError::Verification(_) => 14,
        }
    }
}

impl From<BeliefError> for CliError {
    fn from(e: BeliefError) -> Self {
        match e {
            BeliefError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Belief(b) => b.into(),
            EngineError::HorizonCapExceeded { .. }
            | EngineError::ToleranceUnreachable { .. }
            | EngineError::TooManyIndifferenceNodes { .. }
            | EngineError::TooManyCandidates { .. }
            | EngineError::FrontierTooLarge { .. } => CliError::Cap(e.to_string()),
            EngineError::InvalidParameter { .. } => CliError::Validation(e.to_string()),
            EngineError::MissingTieEntry(_) => CliError::Internal(e.to_string()),
        }
    }
}
