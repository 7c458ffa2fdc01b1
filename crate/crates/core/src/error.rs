//! Error type shared by every stage of the pipeline.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("input is empty")]
    EmptyInput,

    #[error("not found: {0}")]
    NotFound(String),

    #[error("unsupported format_version {found} (expected {expected})")]
    VersionMismatch { found: i64, expected: u32 },

    #[error("frame {frame}: missing visible {role} landmark")]
    MissingToolLandmarks { frame: u32, role: &'static str },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("need at least 2 points, got {0}")]
    InsufficientPoints(usize),

    #[error("need at least 2 clusters to build a reference frame, got {0}")]
    InsufficientClusters(usize),

    #[error("need at least 2 frames, got {0}")]
    InsufficientFrames(usize),

    #[error("too few points: {points} points for {required} clusters/components")]
    TooFewPoints { points: usize, required: usize },

    #[error("frame {frame}: tissue sample {track_id} has no cluster label")]
    MissingLabels { frame: u32, track_id: String },

    #[error("cluster is empty")]
    EmptyCluster,

    #[error("k-means produced an empty cluster after re-seeding")]
    EmptyClusterAfterReseed,

    #[error("relative angle jumps by {jump:.6} rad between frames {prev} and {next}")]
    Unwrap { prev: u32, next: u32, jump: f64 },

    #[error("EM component {component} collapsed after re-seeding")]
    NumericalCollapse { component: usize },

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("split {train}/{test} does not match dataset length {len}")]
    LengthMismatch { train: usize, test: usize, len: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable class token used in machine-readable error lines.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Format(_) => "FormatError",
            Error::Validation(_) => "ValidationError",
            Error::EmptyInput => "EmptyInput",
            Error::NotFound(_) => "NotFound",
            Error::VersionMismatch { .. } => "VersionMismatch",
            Error::MissingToolLandmarks { .. } => "MissingToolLandmarks",
            Error::DegenerateConfiguration(_) => "DegenerateConfiguration",
            Error::InsufficientPoints(_) => "InsufficientPoints",
            Error::InsufficientClusters(_) => "InsufficientClusters",
            Error::InsufficientFrames(_) => "InsufficientFrames",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::MissingLabels { .. } => "MissingLabels",
            Error::EmptyCluster => "EmptyCluster",
            Error::EmptyClusterAfterReseed => "EmptyClusterError",
            Error::Unwrap { .. } => "UnwrapError",
            Error::NumericalCollapse { .. } => "NumericalCollapse",
            Error::Domain(_) => "DomainError",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateConfiguration(_)
                | Error::Unwrap { .. }
                | Error::NumericalCollapse { .. }
                | Error::EmptyClusterAfterReseed
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound(e.to_string())
        } else {
            Error::Io(e.to_string())
        }
    }
}
