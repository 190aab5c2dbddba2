//! Exact rational scalars and the integer combinatorics built on them.
//!
//! Every expectation in this crate is an `ExactScalar` (an arbitrary
//! precision rational kept in lowest terms). On the wire, rationals are
//! strings of the form `"num/den"` or a bare integer `"num"`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in lowest terms with a positive denominator.
pub type ExactScalar = BigRational;

pub fn int(n: i64) -> ExactScalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> ExactScalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"a/b"`, `"-a/b"` or `"a"`. Whitespace around the parts is ignored.
pub fn parse_rational(s: &str) -> Result<ExactScalar> {
    let err = |reason: &str| Error::ParseRational {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let trimmed = s.trim();
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err("bad numerator"))?;
    let den: BigInt = den.parse().map_err(|_| err("bad denominator"))?;
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

/// Canonical text form: `"num/den"`, or just `"num"` when the denominator is 1.
pub fn format_rational(x: &ExactScalar) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal rendering rounded half-up (toward +infinity on ties) to `places` digits.
pub fn to_decimal(x: &ExactScalar, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = x * BigRational::from_integer(scale.clone());
    let half = ratio(1, 2);
    let rounded = (scaled + half).floor().to_integer();
    let negative = rounded.is_negative();
    let digits = rounded.abs().to_string();
    let body = if places == 0 {
        digits
    } else {
        let padded = format!("{:0>width$}", digits, width = places + 1);
        let (whole, frac) = padded.split_at(padded.len() - places);
        format!("{whole}.{frac}")
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Nearest `f64`; huge magnitudes go to +/- infinity.
pub fn to_f64(x: &ExactScalar) -> f64 {
    if let Some(v) = x.to_f64() {
        return v;
    }
    // Manual fallback for numerators/denominators beyond f64 range.
    let n = x.numer().bits() as i64;
    let d = x.denom().bits() as i64;
    let shift = n - d;
    let mantissa = if shift > 0 {
        BigRational::new(x.numer().clone(), x.denom() << (shift as usize))
    } else {
        BigRational::new(x.numer() << ((-shift) as usize), x.denom().clone())
    };
    mantissa.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32)
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    BigInt::from_biguint(Sign::Plus, acc)
}

/// Falling factorial n!/(n-j)! for j <= n.
pub fn falling_factorial(n: usize, j: usize) -> BigInt {
    ((n - j + 1)..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn lcm_of_denominators<'a>(xs: impl IntoIterator<Item = &'a ExactScalar>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Serde adapter storing an `ExactScalar` as its canonical string.
pub mod serde_rational {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &ExactScalar, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ExactScalar, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(de::Error::custom)
    }
}

/// Same as [`serde_rational`] for `Vec<ExactScalar>`.
pub mod serde_rational_vec {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[ExactScalar], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<ExactScalar>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rational(s).map_err(de::Error::custom))
            .collect()
    }
}

/// Same as [`serde_rational`] for row-major nested vectors.
pub mod serde_rational_rows {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<ExactScalar>], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(rows.iter().map(|r| r.iter().map(format_rational).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<ExactScalar>>, D::Error> {
        let raw = Vec::<Vec<String>>::deserialize(d)?;
        raw.iter()
            .map(|r| {
                r.iter()
                    .map(|s| parse_rational(s).map_err(de::Error::custom))
                    .collect()
            })
            .collect()
    }
}
