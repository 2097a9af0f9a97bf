use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("parse error{}: {message}", offset.map(|o| format!(" at byte {o}")).unwrap_or_default())]
    Parse { offset: Option<usize>, message: String },
    #[error("invalid process: {0}")]
    Invalid(String),
    #[error("matrix side {side} exceeds the limit {limit} (raise --max-dim)")]
    DimensionOverflow { side: usize, limit: usize },
    #[error("no conic solver backend is available in this build")]
    SolverUnavailable,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Parse { .. } | CliError::Invalid(_) | CliError::DimensionOverflow { .. } => 2,
            CliError::SolverUnavailable => 3,
        }
    }
}

impl From<memzoo_core::Error> for CliError {
    fn from(e: memzoo_core::Error) -> Self {
        match e {
            memzoo_core::Error::SolverUnavailable => CliError::SolverUnavailable,
            other => CliError::Invalid(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
