//! Exact rational scalars.
//!
//! Every coefficient in the crate is a `Rat`: arbitrary-precision rationals
//! kept in lowest terms with positive denominator. No floating point appears
//! anywhere.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

pub type Rat = BigRational;

/// Integer as a rational.
pub fn q(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Fraction n/d, normalized.
pub fn qr(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical text form: `p` when the denominator is 1, else `p/q`.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `p` or `p/q`. The denominator must be positive after normalization.
pub fn rat_from_str(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Rat::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(Rat::from_integer(n))
    }
}

pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}
