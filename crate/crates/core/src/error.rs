use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("size mismatch: {left} points vs {right} points")]
    SizeMismatch { left: usize, right: usize },

    #[error("{n} points exceed the assignment cap of {cap}; subsample first")]
    CapExceeded { n: usize, cap: usize },

    #[error("empirical measure must contain at least one point")]
    EmptyMeasure,

    #[error("non-finite coordinate at point {index}")]
    NonFinite { index: usize },

    #[error("orthonormal frame undefined for the zero vector")]
    ZeroVector,

    #[error("angular cutoff zeta_min = {zeta_min} leaves no mass below pi")]
    DegenerateCutoff { zeta_min: f64 },

    #[error("mean-field rate needs the position marginal of the current law")]
    MissingAux,

    #[error("negative duration: t = {t} < s = {s}")]
    NegativeDuration { s: f64, t: f64 },

    #[error("angular quadrature under-resolved: {coarse} vs {fine} at n_quad = {n_quad}")]
    QuadratureUnderResolved { n_quad: usize, coarse: f64, fine: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("threshold failure: {0}")]
    ThresholdFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
