use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("not a frame: the vectors do not span the space")]
    NotAFrame,
    #[error("undecided: {subsets} subsets exceed the enumeration cap {cap}")]
    EnumerationCap { subsets: f64, cap: f64 },
    #[error("degenerate hull: the frame vectors lie on a common hyperplane")]
    DegenerateHull,
    #[error("frame is not omnidirectional (origin not interior to the hull); augment it with make_omnidirectional")]
    NotOmnidirectional,
    #[error(
        "frame is not full-spark; pass an explicit override to use the sampling estimate anyway"
    )]
    NotFullSpark,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("not invertible from this output: active set does not contain a frame")]
    NotInvertible,
    #[error("iteration diverged after {0} steps")]
    Diverged(usize),
    #[error("parse error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
