//! Crate-wide error type.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by constructors and operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector length does not match the declared dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The operation is only defined in the stated dimension.
    #[error("unsupported dimension: {got} (operation requires n = {required})")]
    UnsupportedDimension { required: usize, got: usize },

    /// The requested quantile is not a finite number.
    #[error("infinite quantile: u = {u} has no finite quantile for this distribution")]
    InfiniteQuantile { u: f64 },

    /// Sampling was requested with an empty sample size.
    #[error("empty sample: requested n = 0 draws")]
    EmptySample,

    /// Raw data could not be turned into a model object.
    #[error("ingestion error: {0}")]
    Ingestion(String),

    /// Bernoulli coupling requires p <= q; caller should swap.
    #[error("order error: p = {p} exceeds q = {q}; swap the arguments")]
    Order { p: f64, q: f64 },

    /// A derived quantity violated an internal invariant beyond tolerance.
    #[error("internal consistency error: {0}")]
    InternalConsistency(String),

    /// The copula family has a singular component; the requested density
    /// does not exist.
    #[error("singular family — density undefined")]
    SingularFamily,

    /// The requested operation is not available for this family.
    #[error("capability error: {0}")]
    Capability(String),

    /// An integration grid is too coarse to be meaningful.
    #[error("resolution error: grid n = {n} is below the minimum of {min}")]
    Resolution { n: usize, min: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn ingestion(msg: impl Into<String>) -> Self {
        Error::Ingestion(msg.into())
    }
}
