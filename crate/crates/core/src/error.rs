use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Lévy measure has infinite mass; simulate a truncated measure via `truncated(eps)`")]
    InfiniteMeasure,

    #[error("quadrature on [{a}, {b}] failed: {reason}")]
    Quadrature { a: f64, b: f64, reason: String },

    #[error("jump set is not bounded away from zero under an infinite-activity measure")]
    SetNotBoundedAwayFromZero,

    #[error("enumerating C({jumps}, {arity}) tuples exceeds the budget of 2^{budget_bits}")]
    EnumerationBudget {
        jumps: usize,
        arity: usize,
        budget_bits: f64,
    },

    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error(
        "finite-difference step underflowed while keeping jump times ordered (last eps = {eps})"
    )]
    StepUnderflow { eps: f64 },

    #[error("set inclusion violated: {0}")]
    SetInclusion(String),

    #[error("validation failed: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
