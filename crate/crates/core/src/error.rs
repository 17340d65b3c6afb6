use thiserror::Error;

/// Errors raised by the model, optimizer, analytic and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The deadline leaves no time for transmission once computation is paid for.
    #[error("infeasible latency: deadline {deadline} s does not exceed the fixed delay {fixed_delay} s")]
    InfeasibleLatency { deadline: f64, fixed_delay: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cache budget {budget} is infeasible for a library of {library} items")]
    BudgetInfeasible { budget: f64, library: usize },

    /// An asymptotic formula was requested on the wrong side of the Zipf exponent split.
    #[error("wrong branch: {0}")]
    WrongBranch(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("truncation radius {radius} m exceeds the configured cap {cap} m")]
    Truncation { radius: f64, cap: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
