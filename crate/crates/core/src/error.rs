use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{0} is not square-free")]
    NotSquareFree(u64),

    #[error("gcd({a}, {q}) != 1")]
    NotCoprime { a: i64, q: u64 },

    /// A documented size or overflow limit was exceeded.
    #[error("range guard `{guard}` violated: {detail}")]
    Range { guard: &'static str, detail: String },

    #[error("singular factor at p = {0}: p - rho vanishes")]
    SingularFactor(u64),

    #[error("major arcs around {left} and {right} overlap")]
    ArcOverlap { left: String, right: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical check failed: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn range(guard: &'static str, detail: impl Into<String>) -> Self {
        Error::Range {
            guard,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(detail: impl Into<String>) -> Self {
        Error::InvalidParameter(detail.into())
    }
}
