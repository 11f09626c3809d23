//! Scalar abstraction and exact rational helpers.
//!
//! The geometric containers are generic over [`Coord`], an ordered ring
//! scalar. `BigRational`, `BigInt`, and the machine integers satisfy it; the
//! float types do not (no total order), which keeps them out of every exact
//! code path by construction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Num, Signed};
use std::fmt;
use std::str::FromStr;

use crate::{Error, Rat, Result};

/// Ordered exact scalar. Ring operations, total order, signs.
pub trait Coord: Num + Ord + Signed + Clone + fmt::Debug {}
impl<T> Coord for T where T: Num + Ord + Signed + Clone + fmt::Debug {}

/// Rational from an integer pair. `rat(1, 3)` is 1/3.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses "p/q" or a bare integer. Decimal notation is rejected so that no
/// value silently loses exactness on the way in.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    if t.contains('.') {
        return Err(Error::Parse(format!(
            "expected a rational like p/q, got decimal notation {t:?}"
        )));
    }
    Rat::from_str(t).map_err(|e| Error::Parse(format!("bad rational {t:?}: {e}")))
}

/// Floor of a rational as a big integer.
pub fn floor_int(x: &Rat) -> BigInt {
    x.floor().to_integer()
}

/// Ceiling of a rational as a big integer.
pub fn ceil_int(x: &Rat) -> BigInt {
    x.ceil().to_integer()
}

/// Floor as i64; errors if the value is out of machine range.
pub fn floor_i64(x: &Rat) -> Result<i64> {
    big_to_i64(&floor_int(x))
}

/// Ceiling as i64; errors if the value is out of machine range.
pub fn ceil_i64(x: &Rat) -> Result<i64> {
    big_to_i64(&ceil_int(x))
}

pub fn big_to_i64(n: &BigInt) -> Result<i64> {
    i64::try_from(n.clone())
        .map_err(|_| Error::InvalidParam(format!("integer {n} exceeds machine range")))
}

/// base^exp as a big integer. `base >= 2` in every caller, exp is a grid depth.
pub fn big_pow(base: u32, exp: u32) -> BigInt {
    BigInt::from(base).pow(exp)
}

/// Positive lcm of two positive integers; errors on zero or overflow.
pub fn lcm_u32(a: u32, b: u32) -> Result<u32> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidParam("lcm needs positive arguments".into()));
    }
    (a / a.gcd(&b))
        .checked_mul(b)
        .ok_or_else(|| Error::InvalidParam(format!("lcm of {a} and {b} exceeds u32")))
}

/// Canonical display for a rational: "p/q", or bare "p" for integers.
pub fn rat_str(x: &Rat) -> String {
    x.to_string()
}
