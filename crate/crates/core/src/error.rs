use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a mathematical function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A mode/std pair has no representation in the requested family.
    #[error("infeasible parameterization: {0}")]
    InfeasibleParameterization(String),

    /// Caller broke a shape or dimension contract.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite gradient component at latent index {index} ({name})")]
    NonFiniteGradient { index: usize, name: String },

    #[error("optimizer diverged at iteration {iteration}: {detail}")]
    Divergence { iteration: usize, detail: String },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("record {site_id}: end year {end_year} precedes start year {start_year}")]
    InvalidRecord {
        site_id: String,
        start_year: i64,
        end_year: i64,
    },

    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("trajectory has no rows to render")]
    EmptyTrajectory,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("verification failed: {}", failed.join(", "))]
    VerificationFailed { failed: Vec<String> },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for this error: 3 divergence, 4 failed verification,
    /// 2 for everything else (bad input or configuration).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence { .. } => 3,
            Error::VerificationFailed { .. } => 4,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
