//! Exact arithmetic: arbitrary-precision rationals ([`Rat`]), multivariate
//! polynomials over a fixed ordered symbol table ([`MPoly`], [`Vars`]), and
//! rational functions normalized against a factored denominator ([`RFunc`]).
//!
//! Invariants maintained by every constructor and operation:
//! - rationals are always reduced with a positive denominator;
//! - polynomials store no zero terms and iterate in graded-lexicographic
//!   monomial order;
//! - rational-function denominators are products of primitive integer
//!   polynomial factors with positive leading coefficient, sorted
//!   canonically, with every cancellation against the numerator performed
//!   eagerly.
//!
//! The canonical text form produced by `Display` round-trips bit-exactly
//! through [`MPoly::parse`] / [`RFunc::parse`].

mod mpoly;
mod rat;
mod rfunc;

pub use mpoly::{pochhammer, Expo, MPoly, Vars};
pub use rat::{rat, rat_int, rat_pow, Rat};
pub use rfunc::RFunc;

use thiserror::Error;

/// Errors raised by exact-algebra operations.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AlgError {
    /// Exact polynomial division was requested but the divisor does not
    /// divide the dividend.
    #[error("polynomial division left a nonzero remainder")]
    NotDivisible,
    /// A polynomial was expected to contain only even powers of a symbol.
    #[error("polynomial is not even in symbol '{0}'")]
    NotEven(String),
    /// A rational function was expected to reduce to a polynomial but kept a
    /// nontrivial denominator.
    #[error("rational function is not a polynomial: denominator {0} remains")]
    NotPolynomial(String),
    /// A polynomial could not be rewritten in the requested target symbols.
    #[error("cannot rewrite expression in the requested symbols: {0}")]
    NotExpressible(String),
    /// Canonical text could not be parsed back into a value.
    #[error("parse error: {0}")]
    Parse(String),
    /// Two operands were built over different symbol tables.
    #[error("operands use different symbol tables")]
    VarMismatch,
}
