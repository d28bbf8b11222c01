//! Moment functions: positive sequences `m(n)` with `m(0) = 1` and a
//! rational order `s` describing growth like `Γ(1 + s n)`.

use std::fmt;
use std::sync::Arc;

use dashu::integer::{IBig, UBig};

use crate::error::{Error, Result};
use crate::numeric::{
    factorial, float_from_int, float_from_rational, gamma_rational, ln_f64, ln_gamma_rational,
    rational_as_integer, rational_is_negative, rational_is_positive, rational_to_string, Float,
    Mode, Rational, Scalar,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    Gamma,
    Product,
    Quotient,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Product,
    Quotient,
}

enum Node {
    Gamma,
    Product(MomentFunction, MomentFunction),
    Quotient(MomentFunction, MomentFunction),
    Tabulated(Vec<Rational>),
}

/// An immutable moment function. Cloning is cheap.
#[derive(Clone)]
pub struct MomentFunction {
    order: Rational,
    node: Arc<Node>,
}

impl MomentFunction {
    /// `Γ_s(n) = Γ(1 + s n)`.
    pub fn gamma(order: Rational) -> Result<Self> {
        if rational_is_negative(&order) {
            return Err(Error::NegativeOrder(order));
        }
        Ok(MomentFunction {
            order,
            node: Arc::new(Node::Gamma),
        })
    }

    pub fn product(a: &MomentFunction, b: &MomentFunction) -> Self {
        MomentFunction {
            order: &a.order + &b.order,
            node: Arc::new(Node::Product(a.clone(), b.clone())),
        }
    }

    /// `a / b`; the order `s_a - s_b` must be nonnegative.
    pub fn quotient(a: &MomentFunction, b: &MomentFunction) -> Result<Self> {
        if a.order < b.order {
            return Err(Error::QuotientOrder {
                numerator: a.order.clone(),
                denominator: b.order.clone(),
            });
        }
        Ok(MomentFunction {
            order: &a.order - &b.order,
            node: Arc::new(Node::Quotient(a.clone(), b.clone())),
        })
    }

    pub fn combine(a: &MomentFunction, b: &MomentFunction, op: CombineOp) -> Result<Self> {
        match op {
            CombineOp::Product => Ok(Self::product(a, b)),
            CombineOp::Quotient => Self::quotient(a, b),
        }
    }

    /// A finite table `m(0), m(1), ...` with a declared order. Evaluating past
    /// the end of the table is an error.
    pub fn tabulated(order: Rational, values: Vec<Rational>) -> Result<Self> {
        if rational_is_negative(&order) {
            return Err(Error::NegativeOrder(order));
        }
        match values.first() {
            None => return Err(Error::InvalidTable("no values".into())),
            Some(v) if v != &Rational::ONE => {
                return Err(Error::InvalidTable(format!("m(0) = {} but must be 1", v)))
            }
            _ => {}
        }
        if let Some(n) = values.iter().position(|v| !rational_is_positive(v)) {
            return Err(Error::InvalidTable(format!("m({n}) is not positive")));
        }
        Ok(MomentFunction {
            order,
            node: Arc::new(Node::Tabulated(values)),
        })
    }

    pub fn kind(&self) -> MomentKind {
        match *self.node {
            Node::Gamma => MomentKind::Gamma,
            Node::Product(..) => MomentKind::Product,
            Node::Quotient(..) => MomentKind::Quotient,
            Node::Tabulated(_) => MomentKind::Tabulated,
        }
    }

    pub fn order(&self) -> &Rational {
        &self.order
    }

    /// Exact value when it is rational, `None` when irrational.
    pub fn exact_value(&self, n: usize) -> Result<Option<Rational>> {
        match &*self.node {
            Node::Gamma => {
                let x = &self.order * Rational::from(n as u64);
                Ok(rational_as_integer(&x).map(|k| {
                    let k = u64::try_from(k).expect("nonnegative order");
                    Rational::from(factorial(k))
                }))
            }
            Node::Product(a, b) => Ok(match (a.exact_value(n)?, b.exact_value(n)?) {
                (Some(x), Some(y)) => Some(x * y),
                _ => None,
            }),
            Node::Quotient(a, b) => Ok(match (a.exact_value(n)?, b.exact_value(n)?) {
                (Some(x), Some(y)) => Some(x / y),
                _ => None,
            }),
            Node::Tabulated(values) => {
                values
                    .get(n)
                    .cloned()
                    .map(Some)
                    .ok_or(Error::TableExhausted {
                        n,
                        len: values.len(),
                    })
            }
        }
    }

    /// `m(n)` rounded to `precision` bits.
    pub fn value(&self, n: usize, precision: usize) -> Result<Float> {
        if let Some(exact) = self.exact_value(n)? {
            return Ok(float_from_rational(&exact, precision));
        }
        let wp = precision + 16;
        let v = match &*self.node {
            Node::Gamma => {
                let x = Rational::ONE + &self.order * Rational::from(n as u64);
                gamma_rational(&x, wp)
            }
            Node::Product(a, b) => a.value(n, wp)? * b.value(n, wp)?,
            Node::Quotient(a, b) => a.value(n, wp)? / b.value(n, wp)?,
            Node::Tabulated(_) => unreachable!("tabulated values are exact"),
        };
        Ok(v.with_precision(precision).value())
    }

    /// `m(n)` as a scalar in `mode`; exact mode fails for irrational values.
    pub fn value_in(&self, n: usize, mode: Mode) -> Result<Scalar> {
        match mode {
            Mode::Exact => self
                .exact_value(n)?
                .map(Scalar::Exact)
                .ok_or_else(|| Error::NotExact(format!("{self:?}({n})"))),
            Mode::Real { precision } | Mode::Complex { precision } => {
                Ok(Scalar::Real(self.value(n, precision)?))
            }
        }
    }

    /// Values `m(0..=n_max)` in `mode`.
    pub fn table(&self, mode: Mode, n_max: usize) -> Result<MomentTable> {
        let values = match mode {
            Mode::Exact => self
                .exact_table(n_max)?
                .into_iter()
                .enumerate()
                .map(|(n, v)| {
                    v.map(Scalar::Exact)
                        .ok_or_else(|| Error::NotExact(format!("{self:?}({n})")))
                })
                .collect::<Result<Vec<_>>>()?,
            Mode::Real { precision } | Mode::Complex { precision } => self
                .float_table(n_max, precision + 32)?
                .into_iter()
                .map(|v| Scalar::Real(v.with_precision(precision).value()))
                .collect(),
        };
        Ok(MomentTable { values })
    }

    fn exact_table(&self, n_max: usize) -> Result<Vec<Option<Rational>>> {
        match &*self.node {
            Node::Gamma => {
                if let Some(s) = rational_as_integer(&self.order) {
                    let s = u64::try_from(s).expect("nonnegative order");
                    return Ok(integer_gamma_table(s, n_max)
                        .into_iter()
                        .map(|v| Some(Rational::from(v)))
                        .collect());
                }
                (0..=n_max).map(|n| self.exact_value(n)).collect()
            }
            Node::Product(a, b) => Ok(a
                .exact_table(n_max)?
                .into_iter()
                .zip(b.exact_table(n_max)?)
                .map(|(x, y)| Some(x? * y?))
                .collect()),
            Node::Quotient(a, b) => Ok(a
                .exact_table(n_max)?
                .into_iter()
                .zip(b.exact_table(n_max)?)
                .map(|(x, y)| Some(x? / y?))
                .collect()),
            Node::Tabulated(_) => (0..=n_max).map(|n| self.exact_value(n)).collect(),
        }
    }

    fn float_table(&self, n_max: usize, precision: usize) -> Result<Vec<Float>> {
        match &*self.node {
            Node::Gamma => Ok(gamma_float_table(&self.order, n_max, precision)),
            Node::Product(a, b) => Ok(a
                .float_table(n_max, precision)?
                .into_iter()
                .zip(b.float_table(n_max, precision)?)
                .map(|(x, y)| x * y)
                .collect()),
            Node::Quotient(a, b) => Ok(a
                .float_table(n_max, precision)?
                .into_iter()
                .zip(b.float_table(n_max, precision)?)
                .map(|(x, y)| x / y)
                .collect()),
            Node::Tabulated(_) => (0..=n_max).map(|n| self.value(n, precision)).collect(),
        }
    }
}

/// `(s n)!` for `n = 0..=n_max`, built incrementally.
fn integer_gamma_table(s: u64, n_max: usize) -> Vec<UBig> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = UBig::ONE;
    out.push(acc.clone());
    for n in 1..=n_max as u64 {
        for i in 1..=s {
            acc *= UBig::from(s * (n - 1) + i);
        }
        out.push(acc.clone());
    }
    out
}

/// `Γ(1 + s n)` for rational `s = p/q`: `q` base values from `ln Γ`, the rest
/// by `Γ(1 + s(n+q)) = Γ(1 + s n) · Π_{i=1..p} (s n + i)`.
fn gamma_float_table(order: &Rational, n_max: usize, precision: usize) -> Vec<Float> {
    if let Some(s) = rational_as_integer(order) {
        let s = u64::try_from(s).expect("nonnegative order");
        return integer_gamma_table(s, n_max)
            .into_iter()
            .map(|v| float_from_int(v, precision))
            .collect();
    }
    let p = u64::try_from(order.numerator().clone()).expect("nonnegative order");
    let q = u64::try_from(IBig::from(order.denominator().clone())).expect("denominator fits");
    let mut out: Vec<Float> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let v = if (n as u64) < q {
            gamma_rational(
                &(Rational::ONE + order * Rational::from(n as u64)),
                precision,
            )
        } else {
            // Π (p(n-q)/q + i) = Π (p(n-q) + i q) / q^p
            let base = p * (n as u64 - q);
            let num = (1..=p).fold(UBig::ONE, |acc, i| acc * UBig::from(base + i * q));
            let den = UBig::from(q).pow(p as usize);
            let factor =
                float_from_rational(&Rational::from_parts(IBig::from(num), den), precision);
            &out[n - q as usize] * factor
        };
        out.push(v);
    }
    out
}

impl fmt::Debug for MomentFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            Node::Gamma => write!(f, "Γ_{}", rational_to_string(&self.order)),
            Node::Product(a, b) => write!(f, "({a:?}·{b:?})"),
            Node::Quotient(a, b) => write!(f, "({a:?}/{b:?})"),
            Node::Tabulated(v) => write!(
                f,
                "table[{}; order {}]",
                v.len(),
                rational_to_string(&self.order)
            ),
        }
    }
}

/// Precomputed `m(0..=n_max)` in one arithmetic mode.
#[derive(Debug, Clone)]
pub struct MomentTable {
    values: Vec<Scalar>,
}

impl MomentTable {
    pub fn get(&self, n: usize) -> &Scalar {
        &self.values[n]
    }

    /// `m(a) / m(b)`.
    pub fn ratio(&self, a: usize, b: usize) -> Scalar {
        &self.values[a] / &self.values[b]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

const DIAGNOSTIC_PRECISION: usize = 128;

/// Empirical `(a, A)` with `a n^s <= m(n)/m(n-1) <= A n^s` on `1 <= n <= n_max`.
///
/// For order zero this is the plain range of the consecutive ratio, since
/// `n^0 = 1`.
pub fn regularity_constants(m: &MomentFunction, n_max: usize) -> Result<(f64, f64)> {
    if n_max < 1 {
        return Err(Error::InvalidInput("regularity needs n_max >= 1".into()));
    }
    let s = float_from_rational(m.order(), DIAGNOSTIC_PRECISION);
    let table = m.float_table(n_max, DIAGNOSTIC_PRECISION)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for n in 1..=n_max {
        let ratio = &table[n] / &table[n - 1];
        let ln = ln_f64(&ratio)
            - ln_f64(&float_from_int(n as u64, DIAGNOSTIC_PRECISION)) * s.to_f64().value();
        let v = ln.exp();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Empirical `(a, A)` with `a^n Γ_s(n) <= m(n) <= A^n Γ_s(n)` on `1 <= n <= n_max`.
pub fn growth_envelope(m: &MomentFunction, n_max: usize) -> Result<(f64, f64)> {
    if n_max < 1 {
        return Err(Error::InvalidInput(
            "growth envelope needs n_max >= 1".into(),
        ));
    }
    let table = m.float_table(n_max, DIAGNOSTIC_PRECISION)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (n, value) in table.iter().enumerate().skip(1) {
        let x = Rational::ONE + m.order() * Rational::from(n as u64);
        let reference = ln_f64(&ln_gamma_rational(&x, DIAGNOSTIC_PRECISION).exp());
        let root = ((ln_f64(value) - reference) / n as f64).exp();
        lo = lo.min(root);
        hi = hi.max(root);
    }
    Ok((lo, hi))
}
