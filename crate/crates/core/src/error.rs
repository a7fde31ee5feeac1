use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("time {t} outside path domain [0, {horizon}]")]
    OutOfDomain { t: f64, horizon: f64 },

    #[error("sequence of length {len} cannot be coarsened by factor {factor}")]
    NotDivisible { len: usize, factor: usize },

    /// Non-finite state produced at the given (1-based) step of a chain.
    #[error("numerical blowup at step {step}")]
    Blowup { step: usize },

    #[error("all sampled point pairs were degenerate")]
    DegenerateSamples,

    #[error("rate fit needs at least 3 positive estimates, got {0}")]
    TooFewPoints(usize),

    #[error("drift matrix is not Hurwitz; no stationary measure")]
    NotHurwitz,

    #[error("experiment invalid: {blowups} of {paths} paths blew up at h = {h}")]
    ExperimentInvalid { h: f64, blowups: usize, paths: usize },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
