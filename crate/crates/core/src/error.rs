use thiserror::Error;

/// Errors raised by the library. Hypothesis failures in verification reports
/// are data, not errors; these variants are reserved for calls whose
/// preconditions do not hold.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{context}: work estimate {required} exceeds budget {budget}")]
    Budget {
        context: &'static str,
        required: u128,
        budget: u128,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("exact counter overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_budget(context: &'static str, required: u128, budget: u128) -> Result<()> {
    if required > budget {
        Err(Error::Budget {
            context,
            required,
            budget,
        })
    } else {
        Ok(())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
