use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} must be a probability in [0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("prior components must sum to 1, got rho0 = {rho0}, rho1 = {rho1}")]
    InvalidPrior { rho0: f64, rho1: f64 },

    #[error("prior (rho0 = {rho0}) is degenerate; both source values need positive mass")]
    DegeneratePrior { rho0: f64 },

    #[error("prior must be canonical (rho0 >= rho1), got rho0 = {rho0}")]
    NonCanonicalPrior { rho0: f64 },

    #[error("rate {rate} is outside the allowed range {range}")]
    InvalidRate { rate: f64, range: &'static str },

    #[error("a system needs at least one channel")]
    EmptySystem,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("n = {n} exceeds the enumeration limit of {limit}")]
    SizeGuard { n: usize, limit: usize },

    #[error("channel index {index} out of range for a system of {n} channels")]
    ChannelIndex { index: usize, n: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("parameters lie on the boundary: {0}")]
    BoundaryParameter(String),

    #[error("local maximum (r_k - rho1)/(rho0 - rho1) is undefined when rho0 = rho1")]
    UndefinedLocalMax,

    #[error("computation paths disagree: {0}")]
    PathMismatch(String),

    #[error("malformed policy table: {0}")]
    MalformedTable(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn prob(name: &'static str, value: f64) -> Self {
        Error::InvalidProbability { name, value }
    }
}
