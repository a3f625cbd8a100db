//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

use crate::dyadic::DyadicInterval;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dyadic interval: position {position} at level {level}")]
    InvalidInterval { level: u32, position: u64 },

    #[error("interval level {level} too deep for step function of depth {depth}")]
    LevelTooDeep { level: u32, depth: u32 },

    #[error("step function of depth {depth} needs {expected} values, got {got}")]
    ValueCountMismatch {
        depth: u32,
        expected: usize,
        got: usize,
    },

    #[error("depth {0} exceeds the supported maximum {1}")]
    DepthTooLarge(u32, u32),

    #[error("missing ±1 multiplier for {0} which carries a nonzero coefficient")]
    MissingEpsilon(DyadicInterval),

    #[error("multiplier {value} at {interval} outside the admissible range for this mode")]
    EpsilonOutOfRange { interval: DyadicInterval, value: String },

    #[error("weight must be strictly positive on every cell")]
    NonpositiveWeight,

    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("finite-difference stencil leaves the smooth region: {0}")]
    Stencil(String),

    #[error("admissibility constraint violated: {0}")]
    Constraint(String),

    #[error("non-finite value produced in {0}")]
    NonFinite(String),

    #[error("search budget exceeded after {states} states; best completed bound: {best:?}")]
    BudgetExceeded { states: usize, best: Option<f64> },

    #[error("witness replay mismatch: {0}")]
    WitnessMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
