//! Truncated power series in `z ∈ ℂ^N`.
//!
//! Series are truncated by total degree `|α| <= cap`. Operations that lose
//! information at the top (moment derivatives, mostly) lower `valid_degree`
//! instead of pretending the missing coefficients are zero.

mod generators;
mod index;
mod theta;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numeric::{float_pow2, Mode, Rational, Scalar};

pub use generators::{generator_series, Generator};
pub use index::MultiIndex;
pub use theta::{formal_norm, theta_coefficient, theta_series, weighted_degree, ThetaSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct MultiSeries {
    dim: usize,
    cap: u32,
    /// `None` marks a series whose every coefficient was lost.
    valid_degree: Option<u32>,
    mode: Mode,
    coefficients: BTreeMap<MultiIndex, Scalar>,
}

impl MultiSeries {
    /// The zero series.
    pub fn zero(dim: usize, cap: u32, mode: Mode) -> Self {
        assert!(dim >= 1, "series need at least one variable");
        MultiSeries {
            dim,
            cap,
            valid_degree: Some(cap),
            mode,
            coefficients: BTreeMap::new(),
        }
    }

    /// A series with the given coefficients. Repeated indices are summed;
    /// exact inputs are rounded into float modes, floats never become exact.
    pub fn from_coefficients<I>(dim: usize, cap: u32, mode: Mode, coefficients: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Scalar)>,
    {
        let mut out = MultiSeries::zero(dim, cap, mode);
        for (index, value) in coefficients {
            if index.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: index.dim(),
                });
            }
            if index.degree() > cap {
                return Err(Error::IndexOutOfCap { index, cap });
            }
            if !value.mode().same_kind(&mode) && !value.mode().is_exact() {
                return Err(Error::ModeMismatch {
                    expected: mode,
                    found: value.mode(),
                });
            }
            let value = value.to_mode(mode)?;
            out.add_at(index, &value);
        }
        Ok(out)
    }

    pub fn constant(value: Scalar, dim: usize, cap: u32, mode: Mode) -> Result<Self> {
        Self::from_coefficients(dim, cap, mode, [(MultiIndex::zero(dim), value)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn valid_degree(&self) -> Option<u32> {
        self.valid_degree
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of stored (nonzero) coefficients.
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// True when the series carries no trustworthy coefficient at all.
    pub fn is_lost(&self) -> bool {
        self.valid_degree.is_none()
    }

    pub fn get(&self, index: &MultiIndex) -> Option<&Scalar> {
        self.coefficients.get(index)
    }

    pub fn coefficient(&self, index: &MultiIndex) -> Scalar {
        self.coefficients
            .get(index)
            .cloned()
            .unwrap_or_else(|| Scalar::zero(self.mode))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Scalar)> {
        self.coefficients.iter()
    }

    /// Coefficients with `|α| <= valid_degree`.
    pub fn iter_valid(&self) -> impl Iterator<Item = (&MultiIndex, &Scalar)> {
        let limit = self.valid_degree;
        self.coefficients
            .iter()
            .filter(move |(index, _)| limit.is_some_and(|d| index.degree() <= d))
    }

    pub(crate) fn add_at(&mut self, index: MultiIndex, value: &Scalar) {
        if value.is_zero() {
            return;
        }
        let sum = match self.coefficients.get(&index) {
            Some(old) => old + value,
            None => value.clone(),
        };
        if sum.is_zero() {
            self.coefficients.remove(&index);
        } else {
            self.coefficients.insert(index, sum);
        }
    }

    pub(crate) fn from_parts(
        dim: usize,
        cap: u32,
        valid_degree: Option<u32>,
        mode: Mode,
        coefficients: BTreeMap<MultiIndex, Scalar>,
    ) -> Self {
        MultiSeries {
            dim,
            cap,
            valid_degree,
            mode,
            coefficients,
        }
    }

    /// Keeps `|α| <= degree`; both the cap and the valid degree shrink.
    pub fn truncate(&self, degree: u32) -> MultiSeries {
        let cap = self.cap.min(degree);
        MultiSeries {
            dim: self.dim,
            cap,
            valid_degree: self.valid_degree.map(|d| d.min(cap)),
            mode: self.mode,
            coefficients: self
                .coefficients
                .iter()
                .filter(|(index, _)| index.degree() <= cap)
                .map(|(i, v)| (i.clone(), v.clone()))
                .collect(),
        }
    }

    /// Lowers the valid degree; it never goes up.
    pub fn restrict_valid(&self, degree: Option<u32>) -> MultiSeries {
        let mut out = self.clone();
        out.valid_degree = match (self.valid_degree, degree) {
            (Some(a), Some(b)) => Some(a.min(b)),
            _ => None,
        };
        out
    }

    pub fn to_mode(&self, mode: Mode) -> Result<MultiSeries> {
        let coefficients = self
            .coefficients
            .iter()
            .map(|(i, v)| Ok((i.clone(), v.to_mode(mode)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(MultiSeries {
            mode,
            coefficients,
            ..self.clone_empty()
        })
    }

    fn clone_empty(&self) -> MultiSeries {
        MultiSeries {
            dim: self.dim,
            cap: self.cap,
            valid_degree: self.valid_degree,
            mode: self.mode,
            coefficients: BTreeMap::new(),
        }
    }

    fn check_compatible(&self, other: &MultiSeries) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if !self.mode.same_kind(&other.mode) {
            return Err(Error::ModeMismatch {
                expected: self.mode,
                found: other.mode,
            });
        }
        Ok(())
    }

    fn combine(&self, other: &MultiSeries, subtract: bool) -> Result<MultiSeries> {
        self.check_compatible(other)?;
        let cap = self.cap.min(other.cap);
        let mut out = self.truncate(cap);
        out.valid_degree = match (self.valid_degree, other.valid_degree) {
            (Some(a), Some(b)) => Some(a.min(b).min(cap)),
            _ => None,
        };
        for (index, value) in other.coefficients.iter().filter(|(i, _)| i.degree() <= cap) {
            let value = if subtract { -value } else { value.clone() };
            out.add_at(index.clone(), &value);
        }
        Ok(out)
    }

    pub fn add(&self, other: &MultiSeries) -> Result<MultiSeries> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &MultiSeries) -> Result<MultiSeries> {
        self.combine(other, true)
    }

    pub fn scale(&self, factor: &Scalar) -> MultiSeries {
        let mut out = self.clone_empty();
        for (index, value) in &self.coefficients {
            out.add_at(index.clone(), &(value * factor));
        }
        out
    }

    pub fn neg(&self) -> MultiSeries {
        self.scale(&Scalar::from_int(-1, Mode::Exact))
    }

    /// Coefficientwise modulus `M[f]`. Complex series become real.
    pub fn majorant(&self) -> MultiSeries {
        MultiSeries {
            mode: self.mode.real_part(),
            coefficients: self
                .coefficients
                .iter()
                .map(|(i, v)| (i.clone(), v.abs()))
                .collect(),
            ..self.clone_empty()
        }
    }

    /// `Σ_{|α| <= valid_degree} |f_α| r^{|α|}`, an upper bound for the sup of the
    /// truncated series on the closed polydisc of radius `r`.
    ///
    /// Exact in exact mode, a real float otherwise.
    pub fn sup_bound(&self, r: &Rational) -> Scalar {
        let mode = self.mode.real_part();
        let radius = Scalar::from_rational(r, mode);
        let mut powers = vec![Scalar::one(mode)];
        let mut total = Scalar::zero(mode);
        for (index, value) in self.iter_valid() {
            let d = index.degree() as usize;
            while powers.len() <= d {
                let next = powers.last().expect("nonempty") * &radius;
                powers.push(next);
            }
            total = &total + &(&value.abs() * &powers[d]);
        }
        total
    }

    /// Largest coefficient modulus within the valid range, zero for an empty series.
    pub fn max_abs(&self) -> Scalar {
        let mode = self.mode.real_part();
        self.iter_valid()
            .map(|(_, v)| v.abs())
            .fold(
                Scalar::zero(mode),
                |acc, v| if acc.abs_le(&v) { v } else { acc },
            )
    }

    /// Whether `self` is a majorant of `f` on the shared valid range.
    ///
    /// `self` must have real nonnegative coefficients. In float mode the
    /// comparison allows a relative slack of `2^-(prec-16)`.
    pub fn majorizes(&self, f: &MultiSeries) -> Result<bool> {
        if self.dim != f.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: f.dim,
            });
        }
        if let Some((index, _)) = self.iter().find(|(_, v)| v.is_negative_or_nonreal()) {
            return Err(Error::InvalidInput(format!(
                "majorant has a negative or non-real coefficient at {index}"
            )));
        }
        let shared = match (self.valid_degree, f.valid_degree) {
            (Some(a), Some(b)) => a.min(b),
            _ => return Ok(true),
        };
        for (index, value) in f.iter().filter(|(i, _)| i.degree() <= shared) {
            let bound = self.coefficient(index);
            if !abs_le_with_slack(value, &bound) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Equality of coefficient tables on the shared valid range; exact in
    /// exact mode, within `2^-(prec-16)` relative in float mode.
    pub fn approx_eq(&self, other: &MultiSeries) -> bool {
        let shared = match (self.valid_degree, other.valid_degree) {
            (Some(a), Some(b)) => a.min(b),
            (None, None) => return true,
            _ => return false,
        };
        let indices: std::collections::BTreeSet<&MultiIndex> = self
            .coefficients
            .keys()
            .chain(other.coefficients.keys())
            .filter(|i| i.degree() <= shared)
            .collect();
        indices.into_iter().all(|index| {
            let a = self.coefficient(index);
            let b = other.coefficient(index);
            match (&a, &b) {
                (Scalar::Exact(x), Scalar::Exact(y)) => x == y,
                _ => relative_close(&a, &b),
            }
        })
    }

    /// Value of the truncated polynomial at `z` (valid range only).
    pub fn evaluate(&self, z: &[Scalar]) -> Result<Scalar> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: z.len(),
            });
        }
        let mut total = Scalar::zero(self.mode);
        for (index, value) in self.iter_valid() {
            let mut term = value.clone();
            for (zj, &aj) in z.iter().zip(index.parts()) {
                for _ in 0..aj {
                    term = &term * zj;
                }
            }
            total = &total + &term;
        }
        Ok(total)
    }

    /// CSV with header `alpha_1,...,alpha_N,re,im`, one row per stored index
    /// in index order. Exact values are written as lossless `p/q`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.dim).map(|j| format!("alpha_{j}")).collect();
        let _ = writeln!(out, "{},re,im", header.join(","));
        for (index, value) in &self.coefficients {
            let (re, im) = value.text_parts();
            let parts: Vec<String> = index.parts().iter().map(|a| a.to_string()).collect();
            let _ = writeln!(out, "{},{re},{im}", parts.join(","));
        }
        out
    }
}

fn slack(precision: usize) -> Scalar {
    Scalar::Real(float_pow2(-(precision as isize - 16), 64))
}

/// `|a| <= |b|`, with relative slack in float mode.
pub(crate) fn abs_le_with_slack(a: &Scalar, b: &Scalar) -> bool {
    if a.abs_le(b) {
        return true;
    }
    let precision = match a.mode().precision().or(b.mode().precision()) {
        Some(p) => p,
        None => return false,
    };
    let excess = &a.abs() - &b.abs();
    let allowed = &a.abs() * &slack(precision);
    excess.abs_le(&allowed)
}

/// `|a - b| <= 2^-(prec-16) · max(|a|, |b|)`.
pub(crate) fn relative_close(a: &Scalar, b: &Scalar) -> bool {
    let precision = a
        .mode()
        .precision()
        .into_iter()
        .chain(b.mode().precision())
        .max()
        .unwrap_or(crate::numeric::DEFAULT_PRECISION);
    let diff = (a - b).abs();
    let scale = if a.abs_le(b) { b.abs() } else { a.abs() };
    diff.abs_le(&(&scale * &slack(precision)))
}
