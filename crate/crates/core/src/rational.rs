//! Exact rational scalars and their `p/q` text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// The scalar field of every complex in this crate.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `(-1)^k` as a scalar.
pub fn sign_q(negative: bool) -> Q {
    if negative {
        -Q::one()
    } else {
        Q::one()
    }
}

/// Parses `p/q`, `p` or `-p/q`. Denominator zero is rejected.
pub fn parse_q(text: &str) -> Result<Q, Error> {
    let t = text.trim();
    let bad = || Error::Parse(format!("bad rational `{text}`"));
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

/// Always `p/q`, with `q = 1` written out, so every file uses one shape.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Bit length of the larger of numerator and denominator.
pub fn bit_size(x: &Q) -> u64 {
    x.numer().abs().bits().max(x.denom().bits())
}
