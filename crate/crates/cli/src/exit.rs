use std::fmt;

use colorbin_core::Error;

pub const OK: i32 = 0;
pub const CHECK_FAILED: i32 = 2;
pub const CAP_EXCEEDED: i32 = 3;
pub const BAD_INPUT: i32 = 4;

/// A verification or dynamics claim that did not hold.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

/// A search stopped at its state budget before reaching an answer.
#[derive(Debug)]
pub struct Inconclusive(pub String);

impl fmt::Display for Inconclusive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inconclusive: {}", self.0)
    }
}

impl std::error::Error for Inconclusive {}

/// Process exit code for an error anywhere in the chain.
pub fn code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<CheckFailed>() {
            return CHECK_FAILED;
        }
        if cause.is::<Inconclusive>() {
            return CAP_EXCEEDED;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::CapExceeded { .. } => CAP_EXCEEDED,
                Error::WitnessRejected(_) | Error::StepCapExceeded(_) => CHECK_FAILED,
                _ => BAD_INPUT,
            };
        }
    }
    BAD_INPUT
}
