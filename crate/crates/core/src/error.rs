use thiserror::Error;

use crate::model::ItemId;

/// Errors raised by the game model, the solvers and the oracles.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown item id {0}")]
    UnknownItem(ItemId),

    #[error("item {0} appears more than once in the profile")]
    DuplicateItem(ItemId),

    #[error("item {0} is not packed in the profile")]
    MissingItem(ItemId),

    #[error("bin {bin} exceeds capacity (load {load})")]
    CapacityExceeded { bin: usize, load: String },

    #[error("profile has {found} bins but the game has only {expected}")]
    TooManyBins { found: usize, expected: usize },

    #[error("bin index {0} out of range")]
    UnknownBin(usize),

    #[error("invalid deviation: {0}")]
    InvalidDeviation(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("instance does not have uniform sizes")]
    NotUniform,

    #[error("uniform size admits at most one item per bin (kappa = {0})")]
    TrivialKappa(u64),

    #[error("operation requires a black and white game (m = 2), got m = {0}")]
    NotBlackWhite(u32),

    #[error("profile is not feasible")]
    InfeasibleProfile,

    #[error("size {size} is not a multiple of 1/{unit}")]
    OffGrid { size: String, unit: u64 },

    #[error("{what}: n = {n} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, n: usize, cap: usize },

    #[error("dynamics did not converge within {0} steps")]
    StepCapExceeded(usize),

    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),

    #[error("generated witness failed verification: {0}")]
    WitnessRejected(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
