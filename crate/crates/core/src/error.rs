use std::path::PathBuf;

/// Everything that can go wrong inside the solver library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite {what} at cell {cell}")]
    NonFinite { what: &'static str, cell: usize },

    #[error("{quantity} = {value:e} is not positive at cell {cell}")]
    Positivity { quantity: &'static str, value: f64, cell: usize },

    #[error("{solver} did not converge after {iterations} iterations (scaled residual {residual:e})")]
    Convergence { solver: &'static str, iterations: usize, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown preset '{name}' (valid: {valid})")]
    UnknownPreset { name: String, valid: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("step {step} at t = {time:e}: {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Short stable tag for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NonFinite { .. } => "numeric",
            Error::Positivity { .. } => "positivity",
            Error::Convergence { .. } => "convergence",
            Error::Config(_) => "config",
            Error::UnknownPreset { .. } => "unknown-preset",
            Error::Io { .. } => "io",
            Error::Step { source, .. } => source.kind(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
