use crate::error::{Error, Result};
use crate::moments::MomentFunction;
use crate::numeric::{
    gamma_rational, ln_gamma_rational, rational_as_integer, rational_is_negative, Mode, Rational,
    Scalar,
};
use crate::operators::moment_diff_z;

use super::{MultiIndex, MultiSeries};

/// `Θ^{(a)}(ρ) = Σ_α Γ(1 + s·α + a) / Γ(1 + s·α) ρ^α`, truncated at `|α| <= cutoff`.
#[derive(Debug, Clone)]
pub struct ThetaSeries {
    pub a: Rational,
    pub s: Vec<Rational>,
    pub series: MultiSeries,
}

/// `Γ(1 + x + a) / Γ(1 + x)` for `x, a >= 0`.
///
/// Integer `a` gives the exact product `(x+1)(x+2)…(x+a)`; otherwise the
/// value is rounded, which fails in exact mode.
pub fn theta_coefficient(x: &Rational, a: &Rational, mode: Mode) -> Result<Scalar> {
    if rational_is_negative(a) || rational_is_negative(x) {
        return Err(Error::InvalidInput(format!(
            "theta needs x, a >= 0, got x={x}, a={a}"
        )));
    }
    if let Some(k) = rational_as_integer(a) {
        let k = u64::try_from(k).expect("checked nonnegative");
        let mut product = Rational::ONE;
        for i in 1..=k {
            product *= x + Rational::from(i);
        }
        return Ok(Scalar::from_rational(&product, mode));
    }
    let precision = mode
        .precision()
        .ok_or_else(|| Error::NotExact(format!("Γ(1+{x}+{a})/Γ(1+{x})")))?;
    let wp = precision + 64;
    let one = Rational::ONE;
    let ln = ln_gamma_rational(&(&one + x + a), wp) - ln_gamma_rational(&(&one + x), wp);
    Scalar::Real(ln.exp().with_precision(precision).value()).to_mode(mode.real_part())
}

pub fn theta_series(a: &Rational, s: &[Rational], cutoff: u32, mode: Mode) -> Result<ThetaSeries> {
    let dim = s.len();
    let mode = mode.real_part();
    let entries = MultiIndex::all_up_to(dim, cutoff)
        .into_iter()
        .map(|alpha| {
            let x = weighted_degree(s, &alpha);
            Ok((alpha, theta_coefficient(&x, a, mode)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThetaSeries {
        a: a.clone(),
        s: s.to_vec(),
        series: MultiSeries::from_coefficients(dim, cutoff, mode, entries)?,
    })
}

pub fn weighted_degree(s: &[Rational], alpha: &MultiIndex) -> Rational {
    s.iter()
        .zip(alpha.parts())
        .fold(Rational::ZERO, |acc, (sj, &aj)| {
            acc + sj * Rational::from(aj)
        })
}

/// The formal norm of `f` at `z0`: `Σ_α |∂^α_{Γ_s,z} f(z0)| / Γ(1 + s·α) ρ^α`
/// for `|α| <= cutoff`.
///
/// At `z0 ≠ 0` each derivative is evaluated as the partial sum of its valid
/// range, so the result is a truncation artefact as much as `f` is.
pub fn formal_norm(
    f: &MultiSeries,
    s: &[Rational],
    z0: &[Scalar],
    cutoff: u32,
) -> Result<MultiSeries> {
    let dim = f.dim();
    if s.len() != dim || z0.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: if s.len() != dim { s.len() } else { z0.len() },
        });
    }
    let available = f.valid_degree().unwrap_or(0);
    if f.is_lost() || cutoff > available {
        return Err(Error::DegreeBudget {
            needed: cutoff,
            available,
        });
    }
    let moments = s
        .iter()
        .map(|sj| MomentFunction::gamma(sj.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mode = f.mode();
    let out_mode = mode.real_part();
    let at_origin = z0.iter().all(Scalar::is_zero);
    let mut entries = Vec::new();
    for alpha in MultiIndex::all_up_to(dim, cutoff) {
        let value = if at_origin {
            let mut v = f.coefficient(&alpha);
            if v.is_zero() {
                continue;
            }
            for (m, &aj) in moments.iter().zip(alpha.parts()) {
                v = &v * &m.value_in(aj as usize, out_mode)?;
            }
            v
        } else {
            moment_diff_z(f, &moments, &alpha)?.evaluate(z0)?
        };
        if value.is_zero() {
            continue;
        }
        let x = Rational::ONE + weighted_degree(s, &alpha);
        let denominator = match out_mode.precision() {
            None => {
                Scalar::Exact(gamma_exact(&x).ok_or_else(|| Error::NotExact(format!("Γ({x})")))?)
            }
            Some(p) => Scalar::Real(gamma_rational(&x, p + 16).with_precision(p).value()),
        };
        entries.push((alpha, &value.abs() / &denominator));
    }
    MultiSeries::from_coefficients(dim, cutoff, out_mode, entries)
}

fn gamma_exact(x: &Rational) -> Option<Rational> {
    let n = u64::try_from(rational_as_integer(x)?).ok()?;
    Some(Rational::from(crate::numeric::factorial(n - 1)))
}
