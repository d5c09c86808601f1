use alloc::string::String;
use core::fmt;

/// Errors raised by the analysis kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of a formula.
    Domain { what: &'static str, value: f64 },
    /// A channel, grid or budget description violates its invariants.
    Config(String),
    /// Water-filling was asked to allocate power with every path at zero gain.
    NoUsablePath,
    /// Cholesky hit a non-positive pivot.
    NotPositiveDefinite { dim: usize, pivot_index: usize, pivot: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::NoUsablePath => f.write_str("no path with non-zero gain to allocate power to"),
            Error::NotPositiveDefinite { dim, pivot_index, pivot } => write!(
                f,
                "{dim}x{dim} matrix is not positive definite: pivot {pivot_index} = {pivot:e}"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
