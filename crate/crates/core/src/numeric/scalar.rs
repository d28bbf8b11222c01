use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu::base::{Abs, Sign};
use serde::{Deserialize, Serialize};

use super::{float_from_rational, float_zero, Float, Rational};
use crate::error::{Error, Result};

/// Arithmetic mode of a series: exact rationals, real floats, or complex floats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Real { precision: usize },
    Complex { precision: usize },
}

impl Mode {
    pub fn real(precision: usize) -> Self {
        Mode::Real { precision }
    }

    pub fn precision(&self) -> Option<usize> {
        match *self {
            Mode::Exact => None,
            Mode::Real { precision } | Mode::Complex { precision } => Some(precision),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Mode::Exact)
    }

    /// Same kind of arithmetic, ignoring precision.
    pub fn same_kind(&self, other: &Mode) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }

    /// Mode used for moduli and sup-bounds: complex collapses to real.
    pub fn real_part(&self) -> Mode {
        match *self {
            Mode::Complex { precision } => Mode::Real { precision },
            m => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Self {
        Complex { re, im }
    }

    pub fn norm(&self) -> Float {
        (&self.re * &self.re + &self.im * &self.im).sqrt()
    }
}

/// One coefficient value.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Real(Float),
    Complex(Complex),
}

impl Scalar {
    pub fn zero(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(Rational::ZERO),
            Mode::Real { precision } => Scalar::Real(float_zero(precision)),
            Mode::Complex { precision } => {
                Scalar::Complex(Complex::new(float_zero(precision), float_zero(precision)))
            }
        }
    }

    pub fn one(mode: Mode) -> Self {
        Scalar::from_rational(&Rational::ONE, mode)
    }

    pub fn from_rational(r: &Rational, mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(r.clone()),
            Mode::Real { precision } => Scalar::Real(float_from_rational(r, precision)),
            Mode::Complex { precision } => Scalar::Complex(Complex::new(
                float_from_rational(r, precision),
                float_zero(precision),
            )),
        }
    }

    pub fn from_int(value: i64, mode: Mode) -> Self {
        Scalar::from_rational(&Rational::from(value), mode)
    }

    pub fn complex(re: &Rational, im: &Rational, precision: usize) -> Self {
        Scalar::Complex(Complex::new(
            float_from_rational(re, precision),
            float_from_rational(im, precision),
        ))
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Real(x) => Mode::Real {
                precision: x.precision(),
            },
            Scalar::Complex(z) => Mode::Complex {
                precision: z.re.precision(),
            },
        }
    }

    /// Converts into `mode`. Floats never turn back into exact rationals.
    pub fn to_mode(&self, mode: Mode) -> Result<Scalar> {
        match (self, mode) {
            (Scalar::Exact(r), m) => Ok(Scalar::from_rational(r, m)),
            (Scalar::Real(x), Mode::Real { precision }) => {
                Ok(Scalar::Real(x.clone().with_precision(precision).value()))
            }
            (Scalar::Real(x), Mode::Complex { precision }) => Ok(Scalar::Complex(Complex::new(
                x.clone().with_precision(precision).value(),
                float_zero(precision),
            ))),
            (Scalar::Complex(z), Mode::Complex { precision }) => Ok(Scalar::Complex(Complex::new(
                z.re.clone().with_precision(precision).value(),
                z.im.clone().with_precision(precision).value(),
            ))),
            (Scalar::Complex(z), Mode::Real { precision })
                if z.im.repr().significand().is_zero() =>
            {
                Ok(Scalar::Real(z.re.clone().with_precision(precision).value()))
            }
            (s, expected) => Err(Error::ModeMismatch {
                expected,
                found: s.mode(),
            }),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r == &Rational::ZERO,
            Scalar::Real(x) => x.repr().significand().is_zero(),
            Scalar::Complex(z) => {
                z.re.repr().significand().is_zero() && z.im.repr().significand().is_zero()
            }
        }
    }

    /// Modulus; complex values become real.
    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.clone().abs()),
            Scalar::Real(x) => Scalar::Real(x.clone().abs()),
            Scalar::Complex(z) => Scalar::Real(z.norm()),
        }
    }

    /// `true` for real-valued scalars that are `< 0`, and for any non-real value.
    pub fn is_negative_or_nonreal(&self) -> bool {
        match self {
            Scalar::Exact(r) => r < &Rational::ZERO,
            Scalar::Real(x) => !x.repr().significand().is_zero() && x.sign() == Sign::Negative,
            Scalar::Complex(z) => {
                !z.im.repr().significand().is_zero()
                    || (!z.re.repr().significand().is_zero() && z.re.sign() == Sign::Negative)
            }
        }
    }

    /// Real part as a float at `precision` (exact values are rounded).
    pub fn re_float(&self, precision: usize) -> Float {
        match self {
            Scalar::Exact(r) => float_from_rational(r, precision),
            Scalar::Real(x) => x.clone().with_precision(precision).value(),
            Scalar::Complex(z) => z.re.clone().with_precision(precision).value(),
        }
    }

    pub fn im_float(&self, precision: usize) -> Float {
        match self {
            Scalar::Complex(z) => z.im.clone().with_precision(precision).value(),
            _ => float_zero(precision),
        }
    }

    /// Modulus as a float at `precision`.
    pub fn abs_float(&self, precision: usize) -> Float {
        match self.abs() {
            Scalar::Exact(r) => float_from_rational(&r, precision),
            Scalar::Real(x) => x.with_precision(precision).value(),
            Scalar::Complex(_) => unreachable!("abs is real"),
        }
    }

    /// `ln |self|` as `f64`, `-inf` for zero. Works far outside the `f64` range.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        match self.abs() {
            Scalar::Exact(r) => super::ln_rational_f64(&r),
            Scalar::Real(x) => super::ln_f64(&x),
            Scalar::Complex(_) => unreachable!("abs is real"),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().value(),
            Scalar::Real(x) => x.to_f64().value(),
            Scalar::Complex(z) => z.re.to_f64().value(),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            _ => None,
        }
    }

    /// Decimal (or exact `p/q`) text for the real and imaginary parts.
    pub fn text_parts(&self) -> (String, String) {
        match self {
            Scalar::Exact(r) => (super::rational_to_string(r), "0".to_string()),
            Scalar::Real(x) => (float_text(x), "0".to_string()),
            Scalar::Complex(z) => (float_text(&z.re), float_text(&z.im)),
        }
    }

    /// `|self| <= |other|` compared on moduli.
    pub fn abs_le(&self, other: &Scalar) -> bool {
        match (self.abs(), other.abs()) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a <= b,
            (a, b) => {
                let p = working_precision(&a, &b);
                a.re_float(p) <= b.re_float(p)
            }
        }
    }

    fn binary(
        &self,
        rhs: &Scalar,
        exact: impl Fn(&Rational, &Rational) -> Rational,
        real: impl Fn(&Float, &Float) -> Float,
        complex: impl Fn(&Complex, &Complex) -> Complex,
    ) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(exact(a, b)),
            (Scalar::Real(a), Scalar::Real(b)) => Scalar::Real(real(a, b)),
            (Scalar::Complex(a), Scalar::Complex(b)) => Scalar::Complex(complex(a, b)),
            _ => {
                let target = promoted_mode(self.mode(), rhs.mode());
                let a = self.to_mode(target).expect("promotion is total");
                let b = rhs.to_mode(target).expect("promotion is total");
                a.binary(&b, exact, real, complex)
            }
        }
    }
}

fn working_precision(a: &Scalar, b: &Scalar) -> usize {
    a.mode()
        .precision()
        .into_iter()
        .chain(b.mode().precision())
        .max()
        .unwrap_or(super::DEFAULT_PRECISION)
}

fn promoted_mode(a: Mode, b: Mode) -> Mode {
    let precision = a.precision().into_iter().chain(b.precision()).max();
    match (a, b) {
        (Mode::Complex { .. }, _) | (_, Mode::Complex { .. }) => Mode::Complex {
            precision: precision.expect("complex carries precision"),
        },
        (Mode::Real { .. }, _) | (_, Mode::Real { .. }) => Mode::Real {
            precision: precision.expect("real carries precision"),
        },
        _ => Mode::Exact,
    }
}

pub(crate) fn float_text(x: &Float) -> String {
    if x.repr().significand().is_zero() {
        return "0".to_string();
    }
    x.to_decimal().value().to_string()
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        self.binary(
            rhs,
            |a, b| a + b,
            |a, b| a + b,
            |a, b| Complex::new(&a.re + &b.re, &a.im + &b.im),
        )
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self.binary(
            rhs,
            |a, b| a - b,
            |a, b| a - b,
            |a, b| Complex::new(&a.re - &b.re, &a.im - &b.im),
        )
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.binary(
            rhs,
            |a, b| a * b,
            |a, b| a * b,
            |a, b| Complex::new(&a.re * &b.re - &a.im * &b.im, &a.re * &b.im + &a.im * &b.re),
        )
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        self.binary(
            rhs,
            |a, b| a / b,
            |a, b| a / b,
            |a, b| {
                let den = &b.re * &b.re + &b.im * &b.im;
                Complex::new(
                    (&a.re * &b.re + &a.im * &b.im) / &den,
                    (&a.im * &b.re - &a.re * &b.im) / &den,
                )
            },
        )
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r.clone()),
            Scalar::Real(x) => Scalar::Real(-x.clone()),
            Scalar::Complex(z) => Scalar::Complex(Complex::new(-z.re.clone(), -z.im.clone())),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.text_parts() {
            (re, im) if im == "0" => write!(f, "{re}"),
            (re, im) => write!(f, "{re}{}{im}i", if im.starts_with('-') { "" } else { "+" }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Scalar::Exact(rational(1, 3));
        let b = Scalar::Exact(rational(1, 6));
        assert_eq!(&a + &b, Scalar::Exact(rational(1, 2)));
        assert_eq!(&a / &b, Scalar::Exact(rational(2, 1)));
    }

    #[test]
    fn mixed_operands_promote() {
        let a = Scalar::Exact(rational(1, 2));
        let b = Scalar::from_rational(&rational(1, 4), Mode::real(128));
        let c = &a * &b;
        assert_eq!(c.mode(), Mode::real(128));
        assert_eq!(c.to_f64(), 0.125);
    }

    #[test]
    fn complex_modulus() {
        let z = Scalar::complex(&rational(3, 1), &rational(4, 1), 64);
        assert_eq!(z.abs().to_f64(), 5.0);
        assert!(z.is_negative_or_nonreal());
        let w = &z * &z; // -7 + 24i
        assert_eq!(w.re_float(64).to_f64().value(), -7.0);
        assert_eq!(w.im_float(64).to_f64().value(), 24.0);
        let q = &w / &z;
        assert!((q.re_float(64).to_f64().value() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn float_cannot_become_exact() {
        let x = Scalar::from_int(1, Mode::real(64));
        assert!(x.to_mode(Mode::Exact).is_err());
    }
}
