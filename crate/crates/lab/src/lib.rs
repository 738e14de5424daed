//! Experiment runner for `indep-core`: JSON configs in, CSV/JSON results and
//! a checksummed manifest out.

pub mod config;
pub mod run;
pub mod table;
pub mod validate;

use indep_core::LabError;
use thiserror::Error;

pub use config::{ExperimentConfig, ExperimentKind, GridSpec};
pub use run::{run, RunSummary};
pub use validate::{validate, Diagnostic};

#[derive(Debug, Error)]
pub enum LabCliError {
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("numeric contract violated: {0}")]
    Numeric(String),
    #[error(transparent)]
    Core(#[from] LabError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl LabCliError {
    /// 2 for bad input, 3 for a violated numeric contract, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabCliError::Validation(_) => 2,
            LabCliError::Numeric(_) => 3,
            LabCliError::Core(LabError::InconsistentBound { .. }) => 3,
            LabCliError::Core(LabError::Io(_)) | LabCliError::Io(_) => 1,
            LabCliError::Core(_) => 2,
        }
    }
}

/// Name of a core error variant, used as a diagnostic code.
pub fn error_code(e: &LabError) -> &'static str {
    match e {
        LabError::EmptyConfiguration => "EmptyConfiguration",
        LabError::RaggedPoints { .. } => "RaggedPoints",
        LabError::CoincidentPoints(..) => "CoincidentPoints",
        LabError::ShapeMismatch(_) => "ShapeMismatch",
        LabError::DimMismatch { .. } => "DimMismatch",
        LabError::NotOnSphere { .. } => "NotOnSphere",
        LabError::NotContractibleHere(_) => "NotContractibleHere",
        LabError::BadScale(_) => "BadScale",
        LabError::BadRadius(_) => "BadRadius",
        LabError::DomainError(_) => "DomainError",
        LabError::DegenerateBlur { .. } => "DegenerateBlur",
        LabError::InfeasibleGeometry(_) => "InfeasibleGeometry",
        LabError::InconsistentBound { .. } => "InconsistentBound",
        LabError::TruncationError { .. } => "TruncationError",
        LabError::InvalidRegion(_) => "InvalidRegion",
        LabError::InvalidGrid(_) => "InvalidGrid",
        LabError::InvalidArgument(_) => "InvalidArgument",
        LabError::Io(_) => "Io",
        LabError::Json(_) => "Json",
    }
}

/// Thread count from `LAB_THREADS`, falling back to the config value.
pub fn effective_threads(config: &ExperimentConfig) -> Option<usize> {
    std::env::var("LAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .or(config.threads)
}
