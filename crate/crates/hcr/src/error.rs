use std::path::PathBuf;

/// Errors surfaced by the CLI and harness, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum HcrError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Data(String),
    #[error("{context}: {source}")]
    Core { context: String, source: hcr_core::Error },
}

impl HcrError {
    pub fn core(context: impl Into<String>, source: hcr_core::Error) -> Self {
        HcrError::Core { context: context.into(), source }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HcrError::Io { path: path.into(), source }
    }

    /// 1 for usage or configuration problems, 2 for unusable data, 3 for
    /// numerical failure during training.
    pub fn exit_code(&self) -> u8 {
        use hcr_core::Error as E;
        match self {
            HcrError::Usage(_) | HcrError::Json { .. } => 1,
            HcrError::Io { .. } | HcrError::Image { .. } | HcrError::Data(_) => 2,
            HcrError::Core { source, .. } => match source {
                E::Singular { .. } | E::NonFinite(_) => 3,
                E::InvalidConfig(_) | E::MissingTemplate(_) | E::DuplicateClass(_) => 1,
                _ => 2,
            },
        }
    }
}

pub type Result<T, E = HcrError> = std::result::Result<T, E>;
