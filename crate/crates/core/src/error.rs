use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid plane: {0}")]
    InvalidPlane(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pairing error: {0}")]
    Pairing(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum { stored: u32, computed: u32 },
    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("empty point set")]
    EmptySet,
    #[error("empty feature cloud")]
    EmptyCloud,
    #[error("missing ground truth: {0}")]
    MissingGroundTruth(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("image error: {0}")]
    Image(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
