use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A parameter set or discipline violates its invariants.
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: &'static str, reason: String },

    /// A station class outside `[0, n)` was requested.
    #[error("class {j} out of range for {n} classes")]
    ClassOutOfRange { j: u8, n: u8 },

    /// An operation was invoked on an entity in the wrong state.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Scenario document could not be parsed or validated.
    #[error("scenario error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// The run exceeded its slot budget without draining every queue.
    #[error("slot budget of {budget} exhausted at t={time_us}us")]
    BudgetExceeded { budget: u64, time_us: u64 },
}

impl Error {
    pub(crate) fn param(key: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            key,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
