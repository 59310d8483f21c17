//! Exact symbolic core: rationals, sparse multivariate polynomials over Q,
//! rational functions, polynomial vector fields and quasi-homogeneity.
//!
//! Every value here is immutable once built and every operation is a pure
//! function, so all types are `Send + Sync`.

mod field;
mod parse;
mod poly;
mod quasi;
mod ratfunc;
mod vars;

pub use field::{apply_field, euler_field, PolyVectorField, RationalVectorField};
pub use parse::{parse, parse_list};
pub use poly::{FastPoly, Monomial, Polynomial};
pub use quasi::{quasi_homogeneity, WeightVector};
pub use ratfunc::RationalFunction;
pub use vars::VarSet;

use thiserror::Error;

/// Exact rational coefficient. `Ratio` keeps numerator and denominator
/// coprime with a positive denominator, and zero as `0/1`.
pub type Rational = num_rational::BigRational;

/// Builds a rational from an integer pair. Panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer.into(), denom.into())
}

/// Builds an integral rational.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(value.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown variable `{name}` at column {column}")]
    UnknownVariable { name: String, column: usize },
    #[error("negative exponent at column {column}")]
    NegativeExponent { column: usize },
    #[error("variable sets differ: [{left}] vs [{right}]")]
    VarMismatch { left: String, right: String },
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("invalid variable list: {0}")]
    InvalidVars(String),
}

pub(crate) fn mismatch(left: &VarSet, right: &VarSet) -> SymError {
    SymError::VarMismatch {
        left: left.to_string(),
        right: right.to_string(),
    }
}
