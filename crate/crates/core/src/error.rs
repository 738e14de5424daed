use thiserror::Error;

/// Errors raised by the laboratory operations.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration has no points")]
    EmptyConfiguration,
    #[error("point {index} has {found} coordinates, expected {expected}")]
    RaggedPoints {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("point {index} has norm {norm}, not on the unit sphere")]
    NotOnSphere { index: usize, norm: f64 },
    #[error("affine hull has full dimension {0}; no contracted copy on the sphere")]
    NotContractibleHere(usize),
    #[error("scale {0} outside (0, 1]")]
    BadScale(f64),
    #[error("cap radius {0} outside (0, 2]")]
    BadRadius(f64),
    #[error("argument {0} outside [-1, 1]")]
    DomainError(f64),
    #[error("blur width {delta} is below the cell width {cell} or above the side")]
    DegenerateBlur { delta: f64, cell: f64 },
    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),
    #[error("inconsistent bound: lower {lower} exceeds upper {upper}")]
    InconsistentBound { lower: f64, upper: f64 },
    #[error("degree {n} requested but spectrum has length {len}")]
    TruncationError { n: usize, len: usize },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
