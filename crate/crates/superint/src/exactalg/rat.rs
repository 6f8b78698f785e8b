//! Arbitrary-precision rational scalars.
//!
//! [`Rat`] is `num::BigRational`, which already maintains the invariants the
//! engine relies on: always fully reduced, denominator always positive.  The
//! helpers here cover the handful of constructions used throughout the crate.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

/// Exact rational scalar (reduced, positive denominator).
pub type Rat = BigRational;

/// `n / d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The integer `n` as an exact rational.
pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// `base^exp` for a non-negative integer exponent.
pub fn rat_pow(base: &Rat, exp: u32) -> Rat {
    let mut acc = Rat::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    acc
}

/// True if the rational is an integer.
pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// The sign of a rational as -1, 0, or +1.
pub fn sign(r: &Rat) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_reduce_and_keep_positive_denominator() {
        let r = rat(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(r.to_string(), "-3/2");
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let b = rat(-3, 7);
        let mut acc = Rat::one();
        for e in 0..8u32 {
            assert_eq!(rat_pow(&b, e), acc);
            acc *= &b;
        }
    }

    #[test]
    fn integer_detection() {
        assert!(is_integer(&rat(8, 4)));
        assert!(!is_integer(&rat(8, 3)));
        assert_eq!(sign(&rat(0, 5)), 0);
        assert_eq!(sign(&rat(-1, 5)), -1);
        assert_eq!(sign(&rat(1, 5)), 1);
    }
}
