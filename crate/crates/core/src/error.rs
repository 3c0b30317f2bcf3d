//! Crate-wide error type. Variant names are stable and appear verbatim in
//! CLI diagnostics, so downstream scripts can match on them.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("InvalidDesign: {0}")]
    InvalidDesign(String),

    #[error("RaggedSample: {0}")]
    RaggedSample(String),

    #[error("NonFiniteValue: {0}")]
    NonFiniteValue(String),

    #[error("InvalidWeights: {0}")]
    InvalidWeights(String),

    #[error("InvalidDistribution: {0}")]
    InvalidDistribution(String),

    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    #[error("TargetOutOfRange: target {target} is not strictly inside ({min}, {max})")]
    TargetOutOfRange { target: f64, min: f64, max: f64 },

    #[error("DegenerateValues: all constrained values are equal")]
    DegenerateValues,

    #[error("NoConvergence: root finder hit the {0}-iteration cap")]
    NoConvergence(usize),

    #[error("RowTooSmall: row {row} has {len} observation(s), need at least 2")]
    RowTooSmall { row: usize, len: usize },

    #[error("NegativeSigma: ranking-noise standard deviation must be >= 0, got {0}")]
    NegativeSigma(f64),

    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),

    #[error("NotDoublyStochastic: {0}")]
    NotDoublyStochastic(String),

    #[error("PopulationTooSmall: population has {population} record(s), need at least {k}")]
    PopulationTooSmall { population: usize, k: usize },

    #[error("WeightMismatch: {0}")]
    WeightMismatch(String),

    #[error("NonPositiveMean: exponential fit needs a positive sample mean, got {0}")]
    NonPositiveMean(f64),

    #[error("ZeroVariance: every row is constant, the studentized statistic is undefined")]
    ZeroVariance,

    #[error("UnbalancedDesign: {0}")]
    UnbalancedDesign(String),

    #[error("Io: {0}")]
    Io(String),

    #[error("Parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
