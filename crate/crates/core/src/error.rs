use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {op} got {left:?} and {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("trace {trace} differs from 1")]
    TraceNotOne { trace: f64 },
    #[error("vectors are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("Kraus family is incomplete: max |sum V^dag V - I| = {deviation:e} exceeds {tolerance:e}")]
    Incomplete { deviation: f64, tolerance: f64 },
    #[error("correlation matrix column {column} is invalid: {reason}")]
    NotColumnStochastic { column: usize, reason: String },
    #[error("unknown outcome {0}")]
    UnknownOutcome(String),
    #[error("unknown pointer state {0}")]
    UnknownPointer(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("degenerate channel: total outcome weight {total:e}")]
    DegenerateChannel { total: f64 },
    #[error("filter collapse: estimated state gives outcome {outcome} weight {weight:e}")]
    FilterCollapse { outcome: String, weight: f64 },
    #[error("undefined rate: {0}")]
    UndefinedRate(String),
    #[error("indeterminate rate: both relative entropies are infinite")]
    IndeterminateRate,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid snapshot: {0}")]
    Snapshot(String),
    #[error("at step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },
    #[error("in sample {sample}: {source}")]
    AtSample { sample: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_sample(self, sample: usize) -> Self {
        Error::AtSample {
            sample,
            source: Box::new(self),
        }
    }

    /// The innermost error, with step/sample context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } | Error::AtSample { source, .. } => source.root(),
            other => other,
        }
    }
}
