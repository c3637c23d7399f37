use std::path::PathBuf;

use crate::repro::{ErrorStats, HistoryPoint};

/// Errors raised anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("sample size must be even (got {0})")]
    OddSampleSize(usize),

    #[error("incompatible samples: {0}")]
    IncompatibleSamples(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ECF sets not aligned: {0}")]
    NotAligned(String),

    /// The running-mean stopping rule did not settle within the evaluation budget.
    #[error("EFECT error mean did not converge after {} evaluations", .partial.count)]
    NotConverged { partial: ErrorStats },

    #[error("insufficient error evaluations (need at least 2, got {0})")]
    InsufficientEvaluations(usize),

    #[error("non-decreasing error; cannot extrapolate (exponent {0})")]
    CannotExtrapolate(f64),

    /// The sample could not be made reproducible within the run budget.
    #[error("run budget of {budget} exhausted before reaching the convergence point")]
    BudgetExceeded {
        budget: usize,
        history: Vec<HistoryPoint>,
    },

    #[error("report/sample incompatible: {0}")]
    ReportIncompatible(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unsupported format_version {found:?} (expected {expected:?})")]
    UnsupportedVersion { found: String, expected: String },

    #[error("unknown model {id:?}; valid ids: {}", .valid.join(", "))]
    UnknownModel { id: String, valid: Vec<String> },

    #[error("non-finite state in run {run} at t = {time}")]
    Integration { run: usize, time: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
