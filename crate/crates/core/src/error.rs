use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid state vector: {0}")]
    InvalidState(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("Kraus operators are not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("measurement effects do not resolve the identity (deviation {deviation:.3e})")]
    Incomplete { deviation: f64 },

    #[error("negative probability mass {mass:.3e} at cell ({row}, {col})")]
    NegativeMass { mass: f64, row: usize, col: usize },

    #[error("joint distribution is not normalized (total {total})")]
    NotNormalized { total: f64 },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("unknown control parameter `{0}`")]
    UnknownControl(String),

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
