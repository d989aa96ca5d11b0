use alloc::string::String;

use crate::overlap::FrameId;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid depth {0}: depth must be positive and finite")]
    InvalidDepth(f64),

    #[error("pixel ({u}, {v}) outside a {width}x{height} image")]
    PixelOutOfBounds { u: f64, v: f64, width: u32, height: u32 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("no eligible frames: every frame has an empty voxel set")]
    NoEligibleFrames,

    #[error("frame {0} has an empty voxel set")]
    DegenerateFrame(FrameId),

    #[error("empty voxel set used as a query")]
    EmptyQuery,

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("unknown frame id {0}")]
    UnknownFrame(FrameId),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("missing descriptor for frame {0}")]
    MissingDescriptor(FrameId),

    #[error("descriptor error: {0}")]
    Descriptor(String),

    #[error("no queries")]
    NoQueries,

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn consistency(msg: impl Into<String>) -> Self {
        Error::Consistency(msg.into())
    }
}
