use thiserror::Error;

/// Everything that can go wrong inside the toolkit.
///
/// Numeric payloads are widened to `f64` so the type stays independent of the
/// scalar a computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {name} = {value} is outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameter {name} = {value}: must satisfy {range}")]
    Validation {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    Bracketing { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("integral did not reach tolerance: estimate {estimate}, error bound {error}")]
    Accuracy { estimate: f64, error: f64 },

    #[error("iteration did not converge after {iterations} steps (residual {residual})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("inverse-cdf sampling failed at state x = {x} for uniform draw u = {u}")]
    Sampling { x: f64, u: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("regime mismatch: {0}")]
    Regime(String),

    #[error("internal numeric failure: {0}")]
    Internal(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(name: &'static str, value: f64, range: &'static str) -> Self {
        Error::Validation { name, value, range }
    }

    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
