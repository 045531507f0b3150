use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shape {rows}x{cols}: {reason}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        reason: &'static str,
    },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("rank deficient: R[{index},{index}] = {value:e} is below tolerance {tolerance:e}")]
    RankDeficient {
        index: usize,
        value: f64,
        tolerance: f64,
    },

    #[error("not positive definite: pivot {index} is {pivot:e}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not symmetric: relative asymmetry {asymmetry:e}")]
    NotSymmetric { asymmetry: f64 },

    #[error("noise variance cannot be estimated with m = n = {n}; supply sigma^2")]
    DegenerateMse { n: usize },

    #[error("index {index} out of range for dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("missing data: {0}")]
    MissingData(&'static str),

    #[error("invalid norm weights: {0}")]
    InvalidWeights(String),

    #[error("sigma^2 = {supplied:e} is inconsistent with the residual estimate {expected:e}")]
    InconsistentVariance { supplied: f64, expected: f64 },

    #[error("regularization parameter must be nonnegative, got {0:e}")]
    NegativeDelta(f64),

    #[error("problem size {size} exceeds the oracle limit {limit}")]
    ScaleExceeded { size: usize, limit: usize },

    #[error("finite-difference result moved by {deviation:e} (relative) when the step was doubled")]
    StepSensitive { deviation: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dataset error: {0}")]
    Dataset(String),
}

impl Error {
    /// True for failures of the numerical kind (rank deficiency, loss of
    /// definiteness, degenerate variance) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::DegenerateMse { .. }
                | Error::StepSensitive { .. }
        )
    }

    /// Variant name, for diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidShape { .. } => "InvalidShape",
            Error::NonFinite { .. } => "NonFinite",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::DegenerateMse { .. } => "DegenerateMse",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::MissingData(_) => "MissingData",
            Error::InvalidWeights(_) => "InvalidWeights",
            Error::InconsistentVariance { .. } => "InconsistentVariance",
            Error::NegativeDelta(_) => "NegativeDelta",
            Error::ScaleExceeded { .. } => "ScaleExceeded",
            Error::StepSensitive { .. } => "StepSensitive",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Dataset(_) => "Dataset",
        }
    }
}
