use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::lp::simplex::SimplexError;
use crate::model::Violation;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Instance data failed validation.
    InvalidInstance(String),
    /// Ordering-cost parameters failed validation.
    InvalidCost(String),
    /// An operation was called outside its domain.
    Precondition(String),
    /// A schedule does not satisfy the instance constraints.
    Infeasible(Vec<Violation>),
    /// A brute-force routine was asked for more than it enumerates.
    SizeCap { what: &'static str, limit: u64, actual: u64 },
    /// The pricing mode cannot be used with the ordering-cost family.
    PricingMismatch { mode: &'static str, family: &'static str },
    /// Column generation hit its column limit before converging.
    ColumnLimit { limit: usize, best_objective: f64 },
    Lp(SimplexError),
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInstance(m) => write!(f, "invalid instance: {m}"),
            Error::InvalidCost(m) => write!(f, "invalid ordering cost: {m}"),
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::Infeasible(v) => {
                write!(f, "infeasible schedule ({} violations)", v.len())?;
                for violation in v.iter().take(5) {
                    write!(f, "; {violation}")?;
                }
                Ok(())
            }
            Error::SizeCap { what, limit, actual } => {
                write!(f, "{what} is {actual}, above the supported limit {limit}")
            }
            Error::PricingMismatch { mode, family } => {
                write!(f, "pricing mode `{mode}` cannot be used with `{family}` ordering costs")
            }
            Error::ColumnLimit { limit, best_objective } => write!(
                f,
                "column generation exceeded {limit} columns (best restricted objective {best_objective})"
            ),
            Error::Lp(e) => write!(f, "linear program: {e}"),
            Error::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl core::error::Error for Error {}

impl From<SimplexError> for Error {
    fn from(e: SimplexError) -> Self {
        Error::Lp(e)
    }
}

pub type Result<T> = core::result::Result<T, Error>;
