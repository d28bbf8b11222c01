//! Arbitrary-precision numbers used throughout the crate.
//!
//! Exact work happens in [`Rational`]; everything else runs on binary
//! floating point [`Float`] with an explicit mantissa precision. The
//! [`Scalar`] enum ties the two (plus a complex variant) together so a
//! series can carry one arithmetic mode picked at runtime.

mod gamma;
mod scalar;

use std::f64::consts::LN_2;

use dashu::base::{Abs, BitTest, Sign};
use dashu::float::round::mode::HalfEven;
use dashu::float::FBig;
use dashu::integer::{IBig, UBig};
use dashu::rational::RBig;

pub use gamma::{
    factorial, gamma, gamma_rational, half_ln_two_pi, ln_gamma, ln_gamma_rational, pi,
};
pub use scalar::{Complex, Mode, Scalar};

/// Binary floating point with round-half-even.
pub type Float = FBig<HalfEven, 2>;

/// Exact rational number.
pub type Rational = RBig;

/// Default mantissa precision in bits.
pub const DEFAULT_PRECISION: usize = 256;

pub fn float_from_int(value: impl Into<IBig>, precision: usize) -> Float {
    Float::from(value.into()).with_precision(precision).value()
}

pub fn float_from_rational(value: &Rational, precision: usize) -> Float {
    value.to_float::<HalfEven, 2>(precision).value()
}

pub fn float_zero(precision: usize) -> Float {
    Float::ZERO.with_precision(precision).value()
}

pub fn float_one(precision: usize) -> Float {
    Float::ONE.with_precision(precision).value()
}

/// `2^-bits` at the given precision.
pub fn float_pow2(bits: isize, precision: usize) -> Float {
    Float::from_parts(IBig::ONE, bits)
        .with_precision(precision)
        .value()
}

pub fn rational(numerator: i64, denominator: u64) -> Rational {
    RBig::from_parts(IBig::from(numerator), UBig::from(denominator))
}

pub fn rational_from_int(value: impl Into<IBig>) -> Rational {
    RBig::from(value.into())
}

/// Integer value of `r` when it has denominator one.
pub fn rational_as_integer(r: &Rational) -> Option<IBig> {
    if r.denominator() == &UBig::ONE {
        Some(r.numerator().clone())
    } else {
        None
    }
}

pub fn rational_to_u64(r: &Rational) -> Option<u64> {
    rational_as_integer(r).and_then(|i| u64::try_from(i).ok())
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().value()
}

/// Lossless `p/q` text, always with an explicit denominator.
pub fn rational_to_fraction(r: &Rational) -> String {
    format!("{}/{}", r.numerator(), r.denominator())
}

/// Shortest lossless text: `p` for integers, `p/q` otherwise.
pub fn rational_to_string(r: &Rational) -> String {
    match rational_as_integer(r) {
        Some(i) => i.to_string(),
        None => rational_to_fraction(r),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {0:?} as an exact rational")]
pub struct ParseRationalError(pub String);

/// Parses `p`, `p/q`, or a plain decimal such as `-0.125` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: IBig = num.trim().parse().map_err(|_| err())?;
        let den: IBig = den.trim().parse().map_err(|_| err())?;
        if den == IBig::ZERO {
            return Err(err());
        }
        return Ok(RBig::from_parts_signed(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || (int_digits.is_empty() && frac.is_empty())
        {
            return Err(err());
        }
        let digits = format!("{}{}", int_digits, frac);
        let mag: UBig = if digits.is_empty() {
            UBig::ZERO
        } else {
            digits.parse().map_err(|_| err())?
        };
        let den = UBig::from(10u8).pow(frac.len());
        let num = if negative {
            -IBig::from(mag)
        } else {
            IBig::from(mag)
        };
        return Ok(RBig::from_parts(num, den));
    }
    let value: IBig = s.parse().map_err(|_| err())?;
    Ok(RBig::from(value))
}

/// Natural logarithm of a positive float as `f64`, valid far beyond the `f64` range.
pub fn ln_f64(x: &Float) -> f64 {
    debug_assert!(x.sign() == Sign::Positive && !x.repr().significand().is_zero());
    let repr = x.repr();
    let significand = repr.significand().clone().abs();
    let bits = significand.bit_len();
    let shift = bits.saturating_sub(62);
    let top: IBig = significand >> shift;
    let top = top.to_f64().value();
    top.ln() + (shift as f64 + repr.exponent() as f64) * LN_2
}

/// Natural logarithm of a positive rational as `f64`.
pub fn ln_rational_f64(r: &Rational) -> f64 {
    let num = float_from_int(r.numerator().clone(), 64);
    let den = float_from_int(IBig::from(r.denominator().clone()), 64);
    ln_f64(&num) - ln_f64(&den)
}

pub(crate) fn rational_is_positive(r: &Rational) -> bool {
    *r > Rational::ZERO
}

pub(crate) fn rational_is_negative(r: &Rational) -> bool {
    *r < Rational::ZERO
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/2").unwrap(), rational(3, 2));
        assert_eq!(parse_rational("-6/4").unwrap(), rational(-3, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rational(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rational(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), rational(7, 1));
        assert_eq!(parse_rational(".5").unwrap(), rational(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn fraction_text_keeps_denominator() {
        assert_eq!(rational_to_fraction(&rational(1, 1)), "1/1");
        assert_eq!(rational_to_fraction(&rational(3, 2)), "3/2");
        assert_eq!(rational_to_string(&rational(4, 2)), "2");
    }

    #[test]
    fn ln_f64_handles_huge_values() {
        let big = float_from_int(IBig::from(10).pow(400), 256);
        let expected = 400.0 * std::f64::consts::LN_10;
        assert!((ln_f64(&big) - expected).abs() < 1e-9);
        let small = float_from_rational(&rational(1, 3), 128);
        assert!((ln_f64(&small) - (1.0f64 / 3.0).ln()).abs() < 1e-14);
    }
}
