use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("axis {axis} out of range for a joint with {ndim} axes")]
    AxisOutOfRange { axis: usize, ndim: usize },

    #[error("axis sets overlap on axis {0}")]
    OverlappingAxes(usize),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("information quantity is negative ({0:e}); the joint is malformed")]
    NegativeInformation(f64),

    #[error("auxiliary alphabet of size {size} exceeds the cap {cap}")]
    CardinalityExceeded { size: usize, cap: usize },

    #[error("unsupported channel class: {0}")]
    UnsupportedClass(String),

    #[error("wrong ordering direction: {0}")]
    WrongDirection(String),

    #[error("degenerate parameter: {0}")]
    Degenerate(String),

    #[error("model is not of the required binary form: {0}")]
    NonBinaryModel(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("bin index {bin} outside [1, {bins}]")]
    BinOutOfRange { bin: usize, bins: usize },

    #[error("limit exceeded: {0}")]
    LimitExceeded(String),

    #[error("singular covariance block: {0}")]
    SingularBlock(String),

    #[error("unit mismatch: {0} vs {1}")]
    UnitMismatch(String, String),

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("config schema: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
