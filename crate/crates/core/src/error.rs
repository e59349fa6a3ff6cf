use thiserror::Error;

/// Errors raised by the seqmcm library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^dag| = {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} exceeds the supported cap of {cap}", cap = crate::qcore::MAX_DIM)]
    DimensionTooLarge(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("entry count {got} does not match dim^2 = {expected}")]
    EntryCount { got: usize, expected: usize },

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not positive semi-definite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("Bloch vector length {0} exceeds 1")]
    BlochOutOfRange(f64),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("label {0} is out of range")]
    LabelOutOfRange(usize),

    #[error("state {0} is not supported on the average state; confidence is infinite")]
    InfiniteConfidence(usize),

    #[error("Kraus operators are not complete (residual {0:.3e})")]
    IncompleteChannel(f64),

    #[error("weakening makes the inconclusive element non-PSD (min eigenvalue {0:.3e})")]
    InfeasibleWeakening(f64),

    #[error("information gain {gain} exceeds the maximum {max}")]
    InfeasibleGain { gain: f64, max: f64 },

    #[error("inconclusive rate {requested} is below the attainable minimum {minimum}")]
    InfeasibleInconclusiveRate { requested: f64, minimum: f64 },

    #[error("party {party}: {source}")]
    Party {
        party: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("problem size beyond supported scale: {0}")]
    UnsupportedScale(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("trace is missing stored channels for party {0}")]
    MissingChannel(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
