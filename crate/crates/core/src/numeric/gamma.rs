//! Gamma function at arbitrary precision.
//!
//! `ln Γ` uses the Stirling series with exact Bernoulli coefficients after
//! shifting the argument up with `Γ(x+1) = xΓ(x)`; integer arguments go
//! through exact factorials instead.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use dashu::base::{Abs, Sign};
use dashu::integer::{IBig, UBig};

use super::{
    float_from_int, float_from_rational, float_one, ln_f64, rational_as_integer, Float, Rational,
};

const GUARD_BITS: usize = 64;

pub fn factorial(n: u64) -> UBig {
    (2..=n).fold(UBig::ONE, |acc, k| acc * UBig::from(k))
}

/// π to `precision` bits (Machin's formula in fixed point).
pub fn pi(precision: usize) -> Float {
    static CACHE: OnceLock<Mutex<HashMap<usize, Float>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&precision) {
        return v.clone();
    }
    let bits = precision + 40;
    let scale = IBig::ONE << bits;
    let value =
        IBig::from(16) * arctan_inverse(5, &scale) - IBig::from(4) * arctan_inverse(239, &scale);
    let pi = Float::from_parts(value, -(bits as isize))
        .with_precision(precision)
        .value();
    cache.lock().unwrap().insert(precision, pi.clone());
    pi
}

/// `scale * atan(1/x)` in fixed point.
fn arctan_inverse(x: u64, scale: &IBig) -> IBig {
    let x = IBig::from(x);
    let x2 = &x * &x;
    let mut power = scale / &x;
    let mut sum = IBig::ZERO;
    let mut k = 0u64;
    while power != IBig::ZERO {
        let term = &power / IBig::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    sum
}

/// `ln(2π)/2` to `precision` bits.
pub fn half_ln_two_pi(precision: usize) -> Float {
    static CACHE: OnceLock<Mutex<HashMap<usize, Float>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&precision) {
        return v.clone();
    }
    let wp = precision + 16;
    let two_pi = pi(wp) * float_from_int(2, wp);
    let v = (two_pi.ln() / float_from_int(2, wp))
        .with_precision(precision)
        .value();
    cache.lock().unwrap().insert(precision, v.clone());
    v
}

/// Bernoulli numbers `B_0, B_2, B_4, ...` up to `B_{2k}` inclusive.
fn even_bernoulli(k: usize) -> Vec<Rational> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().unwrap();
    if guard.len() <= k {
        // Akiyama–Tanigawa; gives B_1 = +1/2 which we never use.
        let n = 2 * k.max(8);
        let mut row: Vec<Rational> = Vec::with_capacity(n + 1);
        let mut evens = Vec::with_capacity(n / 2 + 1);
        for m in 0..=n {
            row.push(Rational::from_parts(IBig::ONE, UBig::from(m as u64 + 1)));
            for j in (1..=m).rev() {
                let diff = &row[j - 1] - &row[j];
                row[j - 1] = diff * Rational::from(j as u64);
            }
            if m % 2 == 0 {
                evens.push(row[0].clone());
            }
        }
        *guard = evens;
    }
    guard[..=k].to_vec()
}

fn working_precision(x_hint: f64, precision: usize) -> usize {
    let magnitude = (x_hint.abs() + 2.0) * (x_hint.abs() + 2.0).ln();
    precision + GUARD_BITS + magnitude.log2().max(0.0).ceil() as usize
}

/// `ln Γ(x)` for real `x > 0`, accurate to about `precision` bits absolute
/// relative to `max(1, |ln Γ(x)|)`.
pub fn ln_gamma(x: &Float, precision: usize) -> Float {
    assert!(
        !x.repr().significand().is_zero() && x.sign() == Sign::Positive,
        "ln_gamma needs a positive argument"
    );
    let x_hint = x.to_f64().value();
    let wp = working_precision(x_hint, precision);
    ln_gamma_at(x.clone().with_precision(wp).value(), x_hint, wp)
        .with_precision(precision)
        .value()
}

fn ln_gamma_at(x: Float, x_hint: f64, wp: usize) -> Float {
    let threshold = (wp / 4).max(16) as f64;
    let one = float_one(wp);
    let mut y = x;
    let mut y_hint = x_hint;
    let mut shift_product = one.clone();
    while y_hint < threshold {
        shift_product = &shift_product * &y;
        y = &y + &one;
        y_hint += 1.0;
    }

    let half = Float::from_parts(IBig::ONE, -1).with_precision(wp).value();
    let ln_y = y.ln();
    let mut acc = (&y - &half) * &ln_y - &y + half_ln_two_pi(wp);

    let y_sq = &y * &y;
    let mut y_power = y.clone();
    let cutoff = -(wp as f64) * std::f64::consts::LN_2;
    let mut k = 1usize;
    let mut bernoulli = even_bernoulli(64);
    let mut previous = f64::INFINITY;
    loop {
        if k >= bernoulli.len() {
            bernoulli = even_bernoulli(2 * k);
        }
        let coeff = &bernoulli[k] / Rational::from((2 * k * (2 * k - 1)) as u64);
        let term = float_from_rational(&coeff, wp) / &y_power;
        let size = ln_f64(&term.clone().abs());
        acc = &acc + &term;
        let scale = ln_f64(&acc.clone().abs()).max(0.0);
        if size < cutoff + scale || size > previous {
            break;
        }
        previous = size;
        y_power = &y_power * &y_sq;
        k += 1;
    }
    if shift_product != one {
        acc = &acc - &shift_product.ln();
    }
    acc
}

/// `Γ(x)` for real `x > 0`.
pub fn gamma(x: &Float, precision: usize) -> Float {
    let x_hint = x.to_f64().value();
    let wp = working_precision(x_hint, precision);
    ln_gamma_at(x.clone().with_precision(wp).value(), x_hint, wp)
        .exp()
        .with_precision(precision)
        .value()
}

/// `Γ(x)` for rational `x > 0`; exact factorials for integer arguments.
pub fn gamma_rational(x: &Rational, precision: usize) -> Float {
    if let Some(n) = rational_as_integer(x) {
        if let Ok(n) = u64::try_from(n) {
            assert!(n >= 1, "gamma_rational needs a positive argument");
            return float_from_int(factorial(n - 1), precision);
        }
    }
    let x_hint = x.to_f64().value();
    let wp = working_precision(x_hint, precision);
    ln_gamma_at(float_from_rational(x, wp), x_hint, wp)
        .exp()
        .with_precision(precision)
        .value()
}

/// `ln Γ(x)` for rational `x > 0`.
pub fn ln_gamma_rational(x: &Rational, precision: usize) -> Float {
    if let Some(n) = rational_as_integer(x) {
        if let Ok(n) = u64::try_from(n) {
            assert!(n >= 1, "ln_gamma_rational needs a positive argument");
            let wp = precision + GUARD_BITS;
            return float_from_int(factorial(n - 1), wp)
                .ln()
                .with_precision(precision)
                .value();
        }
    }
    let x_hint = x.to_f64().value();
    let wp = working_precision(x_hint, precision);
    ln_gamma_at(float_from_rational(x, wp), x_hint, wp)
        .with_precision(precision)
        .value()
}
