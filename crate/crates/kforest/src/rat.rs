//! Exact rational scalars.
//!
//! Every real-valued quantity in this crate (penalties, dual values,
//! epsilons, removal targets, alpha coefficients) is a [`Rat`], an
//! arbitrary-precision rational kept in lowest terms with a positive
//! denominator. All comparisons are exact; there is no epsilon anywhere.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational. `BigRational` normalizes to lowest terms
/// with a positive denominator on construction, which is exactly the
/// invariant we need.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational from an unsigned integer (edge costs, counts).
pub fn rat_u64(n: u64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational `n/d`. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RatParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer in rational literal: {0}")]
    BadInteger(String),
    #[error("denominator must be a positive integer, got: {0}")]
    BadDenominator(String),
}

/// Parses `"p"` or `"p/q"` with optional leading `-` on the numerator.
/// The denominator must be a positive decimal integer.
pub fn parse_rat(s: &str) -> Result<Rat, RatParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RatParseError::Empty);
    }
    let (num_text, den_text) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let numer: BigInt = num_text
        .parse()
        .map_err(|_| RatParseError::BadInteger(num_text.to_string()))?;
    let denom: BigInt = match den_text {
        Some(d) => {
            let parsed: BigInt = d
                .parse()
                .map_err(|_| RatParseError::BadDenominator(d.to_string()))?;
            if !parsed.is_positive() {
                return Err(RatParseError::BadDenominator(d.to_string()));
            }
            parsed
        }
        None => BigInt::one(),
    };
    Ok(BigRational::new(numer, denom))
}

/// Canonical text form: `"p"` when the denominator is 1, else `"p/q"`.
/// This is the form used in all JSON and CSV output.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `⌊r⌋` as a `usize`. Panics if `r` is negative or does not fit.
pub fn floor_usize(r: &Rat) -> usize {
    assert!(!r.is_negative(), "floor_usize on negative rational");
    r.floor()
        .to_integer()
        .to_usize()
        .expect("rational floor out of usize range")
}

/// Smallest `j >= 0` with `2^j >= x`. Requires `x > 0`.
pub fn ceil_log2(x: &Rat) -> u32 {
    assert!(x.is_positive(), "ceil_log2 requires a positive argument");
    let mut j = 0u32;
    let mut pow = Rat::one();
    let two = rat_int(2);
    while pow < *x {
        pow *= &two;
        j += 1;
    }
    j
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}
