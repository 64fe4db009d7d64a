//! Crate-wide error type.
//!
//! Variants are grouped by how the CLI maps them to exit codes: invalid
//! configuration or arguments exit with 2, numerical failures with 3.

use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration, dimensions, or arguments.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Channel reconstruction was asked for with no paths.
    #[error("no paths")]
    NoPaths,

    /// The channel matrix is (numerically) all-zero.
    #[error("rank-deficient channel")]
    RankDeficientChannel,

    /// The combiner has linearly dependent columns.
    #[error("singular combiner")]
    SingularCombiner,

    /// A beamformer design target was the zero vector.
    #[error("zero target")]
    ZeroTarget,

    /// Exhaustive enumeration would exceed the evaluation budget.
    #[error("search space too large: {0}")]
    SearchSpaceTooLarge(String),

    /// Deterministic training matrices need a power-of-two array with
    /// at least as many antennas as training vectors.
    #[error("deterministic construction unavailable: {0}")]
    DeterministicUnavailable(String),

    /// A matrix handed to `mutual_coherence` contains a zero column.
    #[error("zero column")]
    ZeroColumn,

    /// A beam-pattern weight vector was all zeros.
    #[error("zero vector")]
    ZeroVector,

    /// NMSE against an all-zero reference is undefined.
    #[error("zero true channel")]
    ZeroTrueChannel,

    /// The power model summed to zero, so energy efficiency is undefined.
    #[error("zero total power")]
    ZeroTotalPower,

    /// Any other numerical failure (non-finite values, failed solves).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Reading or writing experiment outputs failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::SearchSpaceTooLarge(_)
            | Error::DeterministicUnavailable(_)
            | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
