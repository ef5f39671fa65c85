use std::io;

use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("dimensions {height}x{width} are not powers of two")]
    NotPowerOfTwo { height: usize, width: usize },

    #[error("data length {len} does not match {height}x{width}")]
    BadLength {
        height: usize,
        width: usize,
        len: usize,
    },

    #[error("motion field is not unit-magnitude (max deviation {deviation:.3e})")]
    InvalidMotionField { deviation: f64 },

    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("need at least {needed} seed frames, got {got}")]
    TooFewSeeds { needed: usize, got: usize },

    #[error("frame index {index} out of range for {len} frames")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty source: {0}")]
    EmptySource(String),

    #[error("bad container magic {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported container version {0}")]
    VersionMismatch(u32),

    #[error("container truncated: {0}")]
    Truncated(String),

    #[error("malformed container: {0}")]
    Format(String),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("metadata error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn dims(expected: (usize, usize), got: (usize, usize)) -> Self {
        Error::DimensionMismatch { expected, got }
    }
}
