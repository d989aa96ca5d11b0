use std::path::PathBuf;

use vprdb_core::Error as CoreError;

pub type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl PipelineError {
    pub fn config(msg: impl Into<String>) -> Self {
        PipelineError::Config(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        PipelineError::Input(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io { path: path.into(), source }
    }

    /// Process exit code: 1 config, 2 input, 3 internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Input(_) | PipelineError::Io { .. } => 2,
            PipelineError::Internal(_) => 3,
        }
    }
}

impl From<CoreError> for PipelineError {
    fn from(err: CoreError) -> Self {
        let msg = err.to_string();
        match err {
            CoreError::Config(m) => PipelineError::Config(m),
            CoreError::TooLarge(_) => PipelineError::Config(msg),
            CoreError::Consistency(_) => PipelineError::Internal(msg),
            CoreError::InvalidDepth(_)
            | CoreError::PixelOutOfBounds { .. }
            | CoreError::Shape(_)
            | CoreError::NoEligibleFrames
            | CoreError::DegenerateFrame(_)
            | CoreError::EmptyQuery
            | CoreError::UnknownFrame(_)
            | CoreError::MissingDescriptor(_)
            | CoreError::Descriptor(_)
            | CoreError::NoQueries
            | CoreError::Empty(_) => PipelineError::Input(msg),
        }
    }
}
