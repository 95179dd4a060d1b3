use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no contour")]
    NoContour,
    #[error("degenerate polygon: {0} points, need at least 3")]
    DegeneratePolygon(usize),
    #[error("degenerate sequence: {0} points, need at least 3")]
    DegenerateSequence(usize),
    #[error("no foreground")]
    NoForeground,
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("invalid mask: {0}")]
    InvalidMask(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("bin out of range: {value} >= {n_bins}")]
    BinOutOfRange { value: u32, n_bins: u32 },
    #[error(transparent)]
    Parse(#[from] crate::codec::ParseError),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("line {line}: {reason}")]
    InvalidRecord { line: usize, reason: String },
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("no prediction for sample on line {0}")]
    MissingPrediction(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
