use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured size cap would be exceeded.
    #[error("size cap exceeded: {what} = {value} exceeds the cap {cap}")]
    Cap {
        what: &'static str,
        value: u128,
        cap: u128,
    },

    /// No pair of helper cells exists for a three-cycle at this side length.
    #[error("no helper pair exists for the three-cycle {cycle} at n = {n}")]
    Infeasible { n: usize, cycle: String },

    #[error("parse error: {0}")]
    Parse(String),

    /// A computed object disagrees with what it claims to be.
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn check_cap(what: &'static str, value: u128, cap: u128) -> Result<()> {
    if value > cap {
        Err(Error::Cap { what, value, cap })
    } else {
        Ok(())
    }
}
