use crate::error::{Error, Result};
use crate::numeric::{
    factorial, float_from_rational, ln_gamma_rational, rational_as_integer, rational_is_negative,
    Mode, Rational, Scalar,
};

use super::{MultiIndex, MultiSeries};

/// Test-data and input generators for initial data and forcing.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Zero,
    /// `c^{|α|}` at every index, i.e. `Π_j 1/(1 - c z_j)`.
    Geometric(Rational),
    /// Univariate coefficients `p_0, p_1, ...`; for `N > 1` each `p_l` with
    /// `l >= 1` is placed on every axis. Entries past the cap are dropped.
    Polynomial(Vec<Rational>),
    /// `(l!)^σ` on the axes, `1` at the origin.
    GevreyFactorial(Rational),
    /// Explicit coefficients.
    Terms(Vec<(MultiIndex, Scalar)>),
}

pub fn generator_series(kind: &Generator, dim: usize, cap: u32, mode: Mode) -> Result<MultiSeries> {
    kind.materialize(dim, cap, mode)
}

impl Generator {
    pub fn materialize(&self, dim: usize, cap: u32, mode: Mode) -> Result<MultiSeries> {
        match self {
            Generator::Zero => Ok(MultiSeries::zero(dim, cap, mode)),
            Generator::Geometric(c) => {
                let mut powers = vec![Rational::ONE];
                for d in 1..=cap as usize {
                    let next = &powers[d - 1] * c;
                    powers.push(next);
                }
                let powers: Vec<Scalar> = powers
                    .iter()
                    .map(|p| Scalar::from_rational(p, mode))
                    .collect();
                MultiSeries::from_coefficients(
                    dim,
                    cap,
                    mode,
                    MultiIndex::all_up_to(dim, cap).into_iter().map(|i| {
                        let v = powers[i.degree() as usize].clone();
                        (i, v)
                    }),
                )
            }
            Generator::Polynomial(values) => {
                let mut entries = Vec::new();
                for (l, v) in values.iter().enumerate().take(cap as usize + 1) {
                    let v = Scalar::from_rational(v, mode);
                    if l == 0 {
                        entries.push((MultiIndex::zero(dim), v));
                    } else {
                        for axis in 0..dim {
                            entries.push((MultiIndex::axis(dim, axis, l as u32), v.clone()));
                        }
                    }
                }
                MultiSeries::from_coefficients(dim, cap, mode, entries)
            }
            Generator::GevreyFactorial(sigma) => {
                if rational_is_negative(sigma) {
                    return Err(Error::InvalidInput(format!(
                        "Gevrey generator needs sigma >= 0, got {sigma}"
                    )));
                }
                let mut entries = vec![(MultiIndex::zero(dim), Scalar::one(mode))];
                for l in 1..=cap {
                    let v = factorial_power(l, sigma, mode)?;
                    for axis in 0..dim {
                        entries.push((MultiIndex::axis(dim, axis, l), v.clone()));
                    }
                }
                MultiSeries::from_coefficients(dim, cap, mode, entries)
            }
            Generator::Terms(terms) => {
                MultiSeries::from_coefficients(dim, cap, mode, terms.iter().cloned())
            }
        }
    }
}

/// `(l!)^σ`.
fn factorial_power(l: u32, sigma: &Rational, mode: Mode) -> Result<Scalar> {
    if let Some(k) = rational_as_integer(sigma) {
        let k = usize::try_from(k).expect("sigma checked nonnegative");
        let value = Rational::from(factorial(l as u64).pow(k));
        return Ok(Scalar::from_rational(&value, mode));
    }
    let precision = match mode.precision() {
        Some(p) => p,
        None => return Err(Error::NotExact(format!("({l}!)^{sigma}"))),
    };
    let wp = precision + 64;
    let ln = ln_gamma_rational(&Rational::from(l as u64 + 1), wp) * float_from_rational(sigma, wp);
    Scalar::Real(ln.exp().with_precision(precision).value()).to_mode(mode)
}
