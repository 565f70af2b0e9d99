use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("architecture mismatch: {0}")]
    Architecture(String),

    #[error("non-finite value in {context}{}", layer.map(|l| format!(" (layer {l})")).unwrap_or_default())]
    NonFinite {
        context: String,
        layer: Option<usize>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("snapshot belongs to environment `{snapshot}`, cannot restore into `{env}`")]
    SnapshotMismatch { env: String, snapshot: String },

    #[error("unknown environment `{0}`")]
    UnknownEnv(String),

    #[error("replay buffer holds {size} transitions, cannot sample a batch of {batch}")]
    InsufficientSamples { size: usize, batch: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("checkpoint {}: {reason}", path.display())]
    Checkpoint { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable short name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape { .. } => "shape",
            Error::Architecture(_) => "architecture",
            Error::NonFinite { .. } => "non_finite",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::SnapshotMismatch { .. } => "snapshot_mismatch",
            Error::UnknownEnv(_) => "unknown_env",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::Config(_) => "config",
            Error::Checkpoint { .. } => "checkpoint",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite {
            context: context.into(),
            layer: None,
        }
    }

    pub(crate) fn shape(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Shape {
            context,
            expected,
            actual,
        }
    }
}
