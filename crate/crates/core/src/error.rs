use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("duplicate axis `{0}`")]
    DuplicateAxis(String),

    #[error("axis sets overlap on `{0}`")]
    OverlappingAxes(String),

    #[error("shape mismatch: expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("entry {index} is negative or not finite ({value})")]
    InvalidEntry { index: usize, value: f64 },

    #[error("values sum to {sum}, not 1")]
    NotNormalized { sum: f64 },

    #[error("tensor would hold {size} entries, cap is {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("distribution has empty support")]
    EmptySupport,

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular value decomposition failed: {0}")]
    Decomposition(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("metadata mismatch: {0}")]
    MetadataMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
