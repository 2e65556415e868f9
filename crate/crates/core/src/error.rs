use thiserror::Error;

/// Errors raised by the library. Each variant maps to one CLI exit code.
#[derive(Debug, Error)]
pub enum GafError {
    /// An argument lies outside the domain of the operation (e.g. a point with |z| >= 1).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured resource cap would be exceeded.
    #[error("resource cap exceeded: {what} needs {requested}, cap is {cap}")]
    Resource {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    /// A numerical routine failed (non-convergence, failure budget exhausted).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Invalid experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing run output: {0}")]
    MissingRun(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GafError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        GafError::Domain(msg.into())
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            GafError::Config(_) => 2,
            GafError::Resource { .. } => 3,
            GafError::Numeric(_) => 4,
            GafError::Domain(_) => 2,
            GafError::MissingRun(_) | GafError::Io(_) | GafError::Json(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, GafError>;
