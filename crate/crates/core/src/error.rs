use thiserror::Error;

/// Errors surfaced by the analytics pipeline.
///
/// Data problems (malformed records, misaligned streams) and numeric
/// failures (non-positive-definite covariances, eigensolver breakdown)
/// are reported through this type. Violations of API preconditions such
/// as mismatched partition lengths panic instead.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input record, located by line number.
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    /// Invalid per-frame input, located by frame index.
    #[error("frame {frame}: {msg}")]
    FrameFormat { frame: i64, msg: String },

    /// Numeric failure tied to one track.
    #[error("track {id}: {msg}")]
    Numeric { id: u64, msg: String },

    /// The symmetric eigensolver did not converge.
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    /// Detection and ground-truth streams disagree on a frame.
    #[error("frame {frame}: {msg}")]
    Alignment { frame: i64, msg: String },

    /// Rejected configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input that cannot be processed as a whole (e.g. nothing to score).
    #[error("{0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
