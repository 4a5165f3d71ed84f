//! Exact rational helpers on top of [`num_rational::BigRational`].
//!
//! `BigRational` already keeps values in lowest terms with a positive
//! denominator; this module adds the strict `"p/q"` text form used by every
//! JSON format in the crate plus conversions to and from `f64`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Canonical text form: always `p/q`, reduced, `q > 0` (so zero is `0/1`).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses the canonical `p/q` form. Anything that does not re-format to the
/// identical string is rejected: non-reduced fractions, negative or zero
/// denominators, explicit `+` signs, leading zeros and whitespace.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let (num, den) = text
        .split_once('/')
        .ok_or_else(|| Error::Parse(format!("rational {text:?} is not of the form p/q")))?;
    let numer: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in {text:?}")))?;
    let denom: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in {text:?}")))?;
    if !denom.is_positive() {
        return Err(Error::Parse(format!("denominator of {text:?} must be positive")));
    }
    if !numer.gcd(&denom).is_one() {
        return Err(Error::Parse(format!("rational {text:?} is not in lowest terms")));
    }
    let value = Rational::new_raw(numer, denom);
    if format_rational(&value) != text {
        return Err(Error::Parse(format!("rational {text:?} is not in canonical form")));
    }
    Ok(value)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: fall back on a scaled quotient.
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Largest rational `p / 10^digits` that does not exceed `x`.
pub fn floor_decimal(x: f64, digits: u32) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::Numerical(format!("cannot round non-finite value {x}")));
    }
    let scale = 10f64.powi(digits as i32);
    let scaled = (x * scale).floor();
    let numer = BigInt::from(scaled as i128);
    Ok(Rational::new(numer, BigInt::from(10u32).pow(digits)))
}

/// Exact value of a finite `f64`.
pub fn from_f64_exact(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Numerical(format!("non-finite value {x}")))
}

pub fn is_integral(r: &Rational) -> bool {
    r.is_integer()
}

pub fn pow_usize(base: usize, exp: usize) -> usize {
    base.pow(exp as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        for (n, d) in [(0, 1), (1, 2), (-3, 4), (7, 1)] {
            let r = rat(n, d);
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert_eq!(format_rational(&zero()), "0/1");
        assert_eq!(format_rational(&int(1)), "1/1");
    }

    #[test]
    fn rejects_non_canonical_forms() {
        for bad in ["2/4", "0/2", "1/-2", "-1/-2", "1/0", "+1/2", "01/2", "1", " 1/2", "1/2 ", "a/b"] {
            assert!(parse_rational(bad).is_err(), "{bad} should be rejected");
        }
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
    }

    #[test]
    fn floor_decimal_never_exceeds() {
        let x = std::f64::consts::FRAC_1_SQRT_2;
        let r = floor_decimal(x, 9).unwrap();
        assert!(r <= from_f64_exact(x).unwrap());
        assert_eq!(r, rat(707_106_781, 1_000_000_000));
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigInt::from(3u32).pow(2000);
        let r = Rational::new(big.clone(), big * BigInt::from(4u32));
        assert!((to_f64(&r) - 0.25).abs() < 1e-12);
    }
}
