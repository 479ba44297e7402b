//! Scalar backends: complex float64 and exact complex rationals.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

pub type C64 = Complex64;
pub type Rat = BigRational;
/// Complex number with exact rational real and imaginary parts.
pub type CRat = num_complex::Complex<BigRational>;

/// Which scalar arithmetic a matrix or coefficient tensor carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    #[serde(rename = "float64")]
    Float64,
    #[serde(rename = "rational")]
    Rational,
}

/// Common interface over the two scalar backends. The rational backend is
/// exact; conversion to float64 is total, the reverse is not provided.
pub trait Scalar:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn conjugate(&self) -> Self;
    fn to_c64(&self) -> C64;
    fn is_zero_entry(&self) -> bool;
}

impl Scalar for C64 {
    const BACKEND: Backend = Backend::Float64;

    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_int(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }
    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn is_zero_entry(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl Scalar for CRat {
    const BACKEND: Backend = Backend::Rational;

    fn zero() -> Self {
        CRat::new(Rat::zero(), Rat::zero())
    }
    fn one() -> Self {
        CRat::new(Rat::one(), Rat::zero())
    }
    fn from_int(v: i64) -> Self {
        CRat::new(Rat::from_integer(BigInt::from(v)), Rat::zero())
    }
    fn conjugate(&self) -> Self {
        CRat::new(self.re.clone(), -self.im.clone())
    }
    fn to_c64(&self) -> C64 {
        C64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
    fn is_zero_entry(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back to the quotient of the parts for extreme magnitudes
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn rat_from_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn crat(num: i64, den: i64) -> CRat {
    CRat::new(rat(num, den), Rat::zero())
}

/// Parse an exact rational from `p/q`, an integer, or a plain decimal such
/// as `-0.25`. Decimal strings are converted digit-exactly, never through
/// float64.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::ParseRational(s.to_string()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| Error::ParseRational(s.to_string()))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| Error::ParseRational(s.to_string()))?;
        if d.is_zero() {
            return Err(Error::ParseRational(s.to_string()));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let (sign, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        if !frac_part.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || frac_part.is_empty()
        {
            return Err(Error::ParseRational(s.to_string()));
        }
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac_part);
        let n = BigInt::from_str(&digits).map_err(|_| Error::ParseRational(s.to_string()))?;
        let d = num::pow(BigInt::from(10), frac_part.len());
        return Ok(Rat::new(BigInt::from(sign) * n, d));
    }
    BigInt::from_str(s)
        .map(Rat::from_integer)
        .map_err(|_| Error::ParseRational(s.to_string()))
}

/// Canonical decimal-integer-string form `p/q` (or `p` for integers).
pub fn format_rational(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_crat(re: &str, im: &str) -> Result<CRat> {
    Ok(CRat::new(parse_rational(re)?, parse_rational(im)?))
}

pub fn signum_abs(r: &Rat) -> Rat {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_fraction_and_decimal() {
        assert_eq!(parse_rational("17/4").unwrap(), rat(17, 4));
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a.b").is_err());
        assert!(parse_rational("1.2e3").is_err());
    }

    #[test]
    fn format_roundtrip() {
        for s in ["17/4", "-1/2", "5", "0"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }

    #[test]
    fn decimal_is_exact_not_float() {
        // 0.1 is 1/10 exactly, which no binary float represents
        assert_eq!(parse_rational("0.1").unwrap(), rat(1, 10));
    }
}
