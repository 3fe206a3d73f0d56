//! Exact rational scalars. Everything user-facing parses and prints as `p` or
//! `p/q`; decimal notation is rejected so results stay exact end to end.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;

pub type Rat = BigRational;

/// Rational from small integers. Panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rat {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rat_int(n: i64) -> Rat {
    BigRational::from(BigInt::from(n))
}

/// Parses `p` or `p/q` with optional sign. `q` must be nonzero. Decimal and
/// exponent notation are rejected.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    let bad = || Error::InvalidRational(s.to_string());
    if t.is_empty() || t.contains(['.', 'e', 'E']) {
        return Err(bad());
    }
    let (num_str, den_str) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let numer: BigInt = num_str.parse().map_err(|_| bad())?;
    let denom: BigInt = den_str.parse().map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(numer, denom))
}

/// Canonical rendering: `p` when the denominator is 1, else `p/q`.
pub fn rat_string(r: &Rat) -> String {
    r.to_string()
}

/// Decimal approximation for plot-ready exports. Never used in comparisons.
pub fn rat_to_f64(r: &Rat) -> f64 {
    let numer = r.numer();
    let denom = r.denom();
    let scale = BigInt::from(1u64 << 60);
    let scaled = (numer * &scale) / denom;
    let mut approx = 0.0f64;
    let mut rest = scaled;
    let chunk = BigInt::from(u64::MAX);
    let mut factor = 1.0f64;
    let negative = rest < BigInt::zero();
    if negative {
        rest = -rest;
    }
    while rest > BigInt::zero() {
        let low: BigInt = &rest % (&chunk + 1);
        let digits: u64 = low.try_into().unwrap_or(0);
        approx += digits as f64 * factor;
        rest = &rest / (&chunk + 1);
        factor *= (u64::MAX as f64) + 1.0;
    }
    let value = approx / (1u64 << 60) as f64;
    if negative {
        -value
    } else {
        value
    }
}
