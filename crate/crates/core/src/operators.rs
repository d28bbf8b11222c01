//! Moment derivatives, moment Borel transforms and operator application.
//!
//! A [`TimeSeries`] stores raw coefficients: `û(t) = Σ u_n t^n`. The moment
//! derivative is defined on the `m`-divided form `Σ (u_n / m(n)) t^n`, so on
//! raw coefficients it reads `(∂_{m,t} u)_n = u_{n+1} m(n+1) / m(n)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::moments::{MomentFunction, MomentTable};
use crate::numeric::{Mode, Scalar};
use crate::polygon::OperatorSpec;
use crate::series::{MultiIndex, MultiSeries};

/// `u_0, u_1, ..., u_{n_max}`, each a series in `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dim: usize,
    mode: Mode,
    coefficients: Vec<MultiSeries>,
}

impl TimeSeries {
    pub fn new(dim: usize, mode: Mode, coefficients: Vec<MultiSeries>) -> Result<Self> {
        for c in &coefficients {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.dim(),
                });
            }
            if !c.mode().same_kind(&mode) {
                return Err(Error::ModeMismatch {
                    expected: mode,
                    found: c.mode(),
                });
            }
        }
        Ok(TimeSeries {
            dim,
            mode,
            coefficients,
        })
    }

    /// `n_max + 1` zero coefficients.
    pub fn zero(dim: usize, n_max: usize, cap: u32, mode: Mode) -> Self {
        TimeSeries {
            dim,
            mode,
            coefficients: vec![MultiSeries::zero(dim, cap, mode); n_max + 1],
        }
    }

    /// A `z`-independent series from scalar coefficients.
    pub fn from_scalars(dim: usize, cap: u32, mode: Mode, values: &[Scalar]) -> Result<Self> {
        let coefficients = values
            .iter()
            .map(|v| MultiSeries::constant(v.clone(), dim, cap, mode))
            .collect::<Result<Vec<_>>>()?;
        TimeSeries::new(dim, mode, coefficients)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Largest stored power of `t`; `None` for an empty series.
    pub fn n_max(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn get(&self, n: usize) -> Option<&MultiSeries> {
        self.coefficients.get(n)
    }

    pub fn coefficients(&self) -> &[MultiSeries] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<MultiSeries> {
        self.coefficients
    }

    pub fn truncate_t(&self, len: usize) -> TimeSeries {
        TimeSeries {
            coefficients: self.coefficients.iter().take(len).cloned().collect(),
            ..self.clone_empty()
        }
    }

    /// Applies `f` to every coefficient, keeping order.
    pub fn map(
        &self,
        exec: Execution,
        f: impl Fn(&MultiSeries) -> MultiSeries + Sync + Send,
    ) -> TimeSeries {
        TimeSeries {
            coefficients: exec::map(exec, &self.coefficients, f),
            ..self.clone_empty()
        }
    }

    pub fn try_map(
        &self,
        exec: Execution,
        f: impl Fn(&MultiSeries) -> Result<MultiSeries> + Sync + Send,
    ) -> Result<TimeSeries> {
        let coefficients = exec::map(exec, &self.coefficients, f)
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let mode = coefficients.first().map_or(self.mode, MultiSeries::mode);
        TimeSeries::new(self.dim, mode, coefficients)
    }

    /// Coefficientwise sum over the common `t`-range.
    pub fn add(&self, other: &TimeSeries) -> Result<TimeSeries> {
        self.zip_with(other, MultiSeries::add)
    }

    pub fn sub(&self, other: &TimeSeries) -> Result<TimeSeries> {
        self.zip_with(other, MultiSeries::sub)
    }

    fn zip_with(
        &self,
        other: &TimeSeries,
        f: impl Fn(&MultiSeries, &MultiSeries) -> Result<MultiSeries>,
    ) -> Result<TimeSeries> {
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        TimeSeries::new(self.dim, self.mode, coefficients)
    }

    pub fn majorant(&self) -> TimeSeries {
        TimeSeries {
            mode: self.mode.real_part(),
            coefficients: self
                .coefficients
                .iter()
                .map(MultiSeries::majorant)
                .collect(),
            ..self.clone_empty()
        }
    }

    pub fn approx_eq(&self, other: &TimeSeries) -> bool {
        self.coefficients.len() == other.coefficients.len()
            && self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .all(|(a, b)| a.approx_eq(b))
    }

    fn clone_empty(&self) -> TimeSeries {
        TimeSeries {
            dim: self.dim,
            mode: self.mode,
            coefficients: Vec::new(),
        }
    }
}

/// `m(0..=n_max)` in the real part of `mode`.
pub(crate) fn moment_table(m: &MomentFunction, mode: Mode, n_max: usize) -> Result<MomentTable> {
    m.table(mode.real_part(), n_max)
}

/// `∂_{m0,t} u`: `out_n = u_{n+1} m0(n+1) / m0(n)`, one coefficient shorter.
pub fn moment_diff_t(u: &TimeSeries, m0: &MomentFunction) -> Result<TimeSeries> {
    moment_diff_t_pow(u, m0, 1)
}

/// `∂^j_{m0,t} u`: `out_n = u_{n+j} m0(n+j) / m0(n)`.
pub fn moment_diff_t_pow(u: &TimeSeries, m0: &MomentFunction, j: usize) -> Result<TimeSeries> {
    if u.len() < j + 1 || u.is_empty() {
        return Err(Error::EmptySeries);
    }
    let table = moment_table(m0, u.mode, u.len() - 1)?;
    let coefficients = (0..u.len() - j)
        .map(|n| u.coefficients[n + j].scale(&table.ratio(n + j, n)))
        .collect();
    TimeSeries::new(u.dim, u.mode, coefficients)
}

/// Per-axis moment tables `m_j(0..=cap)` for `z`-derivative weights.
pub(crate) struct ZRatios {
    tables: Vec<MomentTable>,
}

impl ZRatios {
    pub(crate) fn new(moments: &[MomentFunction], mode: Mode, cap: u32) -> Result<Self> {
        let tables = moments
            .iter()
            .map(|m| moment_table(m, mode, cap as usize))
            .collect::<Result<Vec<_>>>()?;
        Ok(ZRatios { tables })
    }

    /// `Π_j m_j(γ_j) / m_j(γ_j - α_j)` for `γ >= α`.
    pub(crate) fn factor(&self, gamma: &MultiIndex, alpha: &MultiIndex) -> Scalar {
        let mut factor: Option<Scalar> = None;
        for (axis, (&g, &a)) in gamma.parts().iter().zip(alpha.parts()).enumerate() {
            if a == 0 {
                continue;
            }
            let r = self.tables[axis].ratio(g as usize, (g - a) as usize);
            factor = Some(match factor {
                Some(f) => &f * &r,
                None => r,
            });
        }
        factor.unwrap_or_else(|| Scalar::one(Mode::Exact))
    }

    pub(crate) fn value(&self, axis: usize, l: u32) -> &Scalar {
        self.tables[axis].get(l as usize)
    }
}

/// `∂^α_{m,z} f`: `out_β = f_{β+α} Π_j m_j(β_j + α_j) / m_j(β_j)`.
///
/// The cap and the valid degree drop by `|α|`; when `|α|` exceeds the valid
/// degree the result is an empty series flagged as lost.
pub fn moment_diff_z(
    f: &MultiSeries,
    m: &[MomentFunction],
    alpha: &MultiIndex,
) -> Result<MultiSeries> {
    check_dims(f, m, alpha)?;
    let ratios = ZRatios::new(m, f.mode(), f.cap())?;
    Ok(moment_diff_z_with(f, &ratios, alpha, Execution::Sequential))
}

fn check_dims(f: &MultiSeries, m: &[MomentFunction], alpha: &MultiIndex) -> Result<()> {
    for found in [m.len(), alpha.dim()] {
        if found != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                found,
            });
        }
    }
    Ok(())
}

pub(crate) fn moment_diff_z_with(
    f: &MultiSeries,
    ratios: &ZRatios,
    alpha: &MultiIndex,
    exec: Execution,
) -> MultiSeries {
    let order = alpha.degree();
    let cap = f.cap().saturating_sub(order);
    let valid = f.valid_degree().and_then(|d| d.checked_sub(order));
    if f.cap() < order {
        return MultiSeries::from_parts(f.dim(), 0, None, f.mode(), BTreeMap::new());
    }
    let entries: Vec<(&MultiIndex, &Scalar)> = f.iter().collect();
    let mapped = exec::map(exec, &entries, |(gamma, value)| {
        gamma
            .checked_sub(alpha)
            .map(|beta| (beta, *value * &ratios.factor(gamma, alpha)))
    });
    let coefficients: BTreeMap<MultiIndex, Scalar> = mapped.into_iter().flatten().collect();
    MultiSeries::from_parts(f.dim(), cap, valid, f.mode(), coefficients)
}

/// `B_{m',t} u`: coefficient `n` divided by `m'(n)`.
pub fn borel_t(u: &TimeSeries, m_prime: &MomentFunction) -> Result<TimeSeries> {
    let Some(n_max) = u.n_max() else {
        return Ok(u.clone());
    };
    let table = moment_table(m_prime, u.mode, n_max)?;
    let coefficients = u
        .coefficients
        .iter()
        .enumerate()
        .map(|(n, c)| c.scale(&(&Scalar::one(Mode::Exact) / table.get(n))))
        .collect();
    TimeSeries::new(u.dim, u.mode, coefficients)
}

/// `B_{m',z} f`: coefficient `α` divided by `Π_j m'_j(α_j)`.
pub fn borel_z(f: &MultiSeries, m_prime: &[MomentFunction]) -> Result<MultiSeries> {
    borel_z_impl(f, m_prime, false)
}

/// Inverse of [`borel_z`]: coefficient `α` multiplied by `Π_j m'_j(α_j)`.
pub fn borel_z_inverse(f: &MultiSeries, m_prime: &[MomentFunction]) -> Result<MultiSeries> {
    borel_z_impl(f, m_prime, true)
}

/// [`borel_z`] on every `t`-coefficient.
pub fn borel_z_time(
    u: &TimeSeries,
    m_prime: &[MomentFunction],
    exec: Execution,
) -> Result<TimeSeries> {
    u.try_map(exec, |c| borel_z(c, m_prime))
}

/// [`borel_z_inverse`] on every `t`-coefficient.
pub fn borel_z_time_inverse(
    u: &TimeSeries,
    m_prime: &[MomentFunction],
    exec: Execution,
) -> Result<TimeSeries> {
    u.try_map(exec, |c| borel_z_inverse(c, m_prime))
}

fn borel_z_impl(f: &MultiSeries, m_prime: &[MomentFunction], inverse: bool) -> Result<MultiSeries> {
    if m_prime.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: m_prime.len(),
        });
    }
    let ratios = ZRatios::new(m_prime, f.mode(), f.cap())?;
    let coefficients = f
        .iter()
        .map(|(alpha, value)| {
            let mut weight = Scalar::one(Mode::Exact);
            for (axis, &l) in alpha.parts().iter().enumerate() {
                weight = &weight * ratios.value(axis, l);
            }
            let v = if inverse {
                value * &weight
            } else {
                value / &weight
            };
            (alpha.clone(), v)
        })
        .collect();
    Ok(MultiSeries::from_parts(
        f.dim(),
        f.cap(),
        f.valid_degree(),
        f.mode(),
        coefficients,
    ))
}

/// Truncated Cauchy product `a(t) w(t)` for scalar `a`; keeps the length of `w`.
fn times_scalar_series(a: &[Scalar], w: &TimeSeries) -> Result<TimeSeries> {
    let mut out = Vec::with_capacity(w.len());
    for n in 0..w.len() {
        let mut acc = w.coefficients[n].scale(&Scalar::zero(Mode::Exact));
        for (k, ak) in a.iter().enumerate().take(n + 1) {
            if ak.is_zero() {
                continue;
            }
            acc = acc.add(&w.coefficients[n - k].scale(ak))?;
        }
        out.push(acc);
    }
    TimeSeries::new(w.dim, w.mode, out)
}

/// `P u = ∂^M_{m0,t} u + Σ a_{j,α}(t) ∂^j_{m0,t} ∂^α_{m,z} u` on the common
/// `t`-range `n <= n_max - max(M, max j)`.
pub fn apply_operator(spec: &OperatorSpec, u: &TimeSeries, exec: Execution) -> Result<TimeSeries> {
    apply_operator_impl(spec, u, exec, false)
}

/// Same shape as [`apply_operator`] with every coefficient `a_{j,α}` replaced
/// by its modulus. Applied to a majorant this bounds every individual term.
pub fn apply_operator_abs(
    spec: &OperatorSpec,
    u: &TimeSeries,
    exec: Execution,
) -> Result<TimeSeries> {
    apply_operator_impl(spec, u, exec, true)
}

fn apply_operator_impl(
    spec: &OperatorSpec,
    u: &TimeSeries,
    exec: Execution,
    abs: bool,
) -> Result<TimeSeries> {
    let order = spec.order() as usize;
    let max_j = spec.terms().iter().map(|t| t.j as usize).max().unwrap_or(0);
    let reach = order.max(max_j);
    if u.len() <= reach {
        return Err(Error::TimeOrder {
            needed: reach + 1,
            available: u.len(),
        });
    }
    if u.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: u.dim(),
        });
    }
    let len = u.len() - reach;
    let m0 = spec.time_moment();
    let mut total = moment_diff_t_pow(u, m0, order)?.truncate_t(len);
    let cap = u
        .coefficients
        .iter()
        .map(MultiSeries::cap)
        .max()
        .unwrap_or(0);
    let ratios = ZRatios::new(spec.space_moments(), u.mode, cap)?;
    for term in spec.terms() {
        let dz = u.map(exec, |c| {
            moment_diff_z_with(c, &ratios, &term.alpha, Execution::Sequential)
        });
        let dt = moment_diff_t_pow(&dz, m0, term.j as usize)?.truncate_t(len);
        let a = term
            .coefficients
            .iter()
            .map(|c| {
                let c = c.to_mode(u.mode)?;
                Ok(if abs { c.abs() } else { c })
            })
            .collect::<Result<Vec<_>>>()?;
        total = total.add(&times_scalar_series(&a, &dt)?)?;
    }
    Ok(total)
}
