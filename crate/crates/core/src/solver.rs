//! Cauchy problems `P u = f`, `∂^j_{m0,t} u(0, z) = φ_j(z)` for `j < M`, and
//! their formal solution.
//!
//! For `n >= M` the raw coefficients satisfy
//!
//! ```text
//! u_n = m0(n-M)/m0(n) · [ g_n - Σ_{(j,α)} Σ_{p=q}^{n} c_{j,α,p} · m0(n-p)/m0(n-p-j) · ∂^α_{m,z} u_{n-p} ]
//! ```
//!
//! with `g_n = f_{n-M}`, `c_{j,α,p}` the coefficients of `t^{M-j} a_{j,α}(t)`
//! and `q = ord_t(a_{j,α}) - j + M`. Below `M` the initial data give
//! `u_n = φ_n / m0(n)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::moments::{regularity_constants, MomentFunction, MomentTable};
use crate::numeric::{Mode, Rational, Scalar};
use crate::operators::{
    apply_operator, apply_operator_abs, borel_z, borel_z_time, borel_z_time_inverse, moment_table,
    TimeSeries, ZRatios,
};
use crate::polygon::{orders_positive, OperatorSpec};
use crate::series::{Generator, MultiIndex, MultiSeries};

/// How the `t`-profile of a separable forcing term evolves.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeProfile {
    /// `c^n`.
    Geometric(Rational),
    /// Finitely many coefficients, zero afterwards.
    Polynomial(Vec<Rational>),
}

impl TimeProfile {
    fn coefficient(&self, n: usize) -> Rational {
        match self {
            TimeProfile::Geometric(c) => {
                let mut v = Rational::ONE;
                for _ in 0..n {
                    v *= c;
                }
                v
            }
            TimeProfile::Polynomial(values) => values.get(n).cloned().unwrap_or(Rational::ZERO),
        }
    }
}

/// Forcing `f(t, z)` description.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    Zero,
    /// `f_n(z) = time_n · space(z)`.
    Separable {
        time: TimeProfile,
        space: Generator,
    },
    /// `f_n` given one by one; zero after the list ends.
    Explicit(Vec<Generator>),
}

#[derive(Debug, Clone)]
pub struct CauchyProblem {
    spec: OperatorSpec,
    initial: Vec<MultiSeries>,
    /// `f_n`; coefficients past the end are zero.
    forcing: TimeSeries,
    mode: Mode,
}

impl CauchyProblem {
    pub fn new(
        spec: OperatorSpec,
        initial: Vec<MultiSeries>,
        forcing: Option<TimeSeries>,
        mode: Mode,
    ) -> Result<Self> {
        let dim = spec.dim();
        if initial.len() != spec.order() as usize {
            return Err(Error::InvalidInput(format!(
                "expected {} initial conditions, got {}",
                spec.order(),
                initial.len()
            )));
        }
        let initial = initial
            .iter()
            .map(|phi| {
                if phi.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: phi.dim(),
                    });
                }
                phi.to_mode(mode)
            })
            .collect::<Result<Vec<_>>>()?;
        let forcing = match forcing {
            Some(f) => {
                if f.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: f.dim(),
                    });
                }
                f.try_map(Execution::Sequential, |c| c.to_mode(mode))?
            }
            None => TimeSeries::new(dim, mode, Vec::new())?,
        };
        Ok(CauchyProblem {
            spec,
            initial,
            forcing,
            mode,
        })
    }

    /// Materializes generator data with enough `z`-degree to report every
    /// `u_n`, `n <= n_max`, up to `report_degree`.
    pub fn from_generators(
        spec: OperatorSpec,
        initial: &[Generator],
        forcing: &Forcing,
        n_max: usize,
        report_degree: u32,
        mode: Mode,
    ) -> Result<Self> {
        let dim = spec.dim();
        let cap = required_degree(&spec, n_max, report_degree);
        let initial = initial
            .iter()
            .map(|g| g.materialize(dim, cap, mode))
            .collect::<Result<Vec<_>>>()?;
        let len = (n_max + 1).saturating_sub(spec.order() as usize);
        let forcing = match forcing {
            Forcing::Zero => None,
            Forcing::Separable { time, space } => {
                let base = space.materialize(dim, cap, mode)?;
                let coefficients = (0..len)
                    .map(|n| base.scale(&Scalar::from_rational(&time.coefficient(n), mode)))
                    .collect();
                Some(TimeSeries::new(dim, mode, coefficients)?)
            }
            Forcing::Explicit(list) => {
                let coefficients = list
                    .iter()
                    .take(len.max(1))
                    .map(|g| g.materialize(dim, cap, mode))
                    .collect::<Result<Vec<_>>>()?;
                Some(TimeSeries::new(dim, mode, coefficients)?)
            }
        };
        CauchyProblem::new(spec, initial, forcing, mode)
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn initial(&self) -> &[MultiSeries] {
        &self.initial
    }

    pub fn forcing(&self) -> &TimeSeries {
        &self.forcing
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `f_n`, or `None` past the stored range (meaning zero).
    fn forcing_at(&self, n: usize) -> Option<&MultiSeries> {
        self.forcing.get(n)
    }
}

/// `D + n_max · max|α|`: the `z`-degree initial data and forcing need so that
/// every `u_n` with `n <= n_max` is valid up to degree `D`.
pub fn required_degree(spec: &OperatorSpec, n_max: usize, report_degree: u32) -> u32 {
    report_degree + n_max as u32 * spec.max_alpha()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: String,
    pub passed: bool,
    pub details: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub const COND_COEFFICIENT_ORDER: &str = "coefficient order";
pub const COND_FINITE_TERMS: &str = "finite term set";
pub const COND_REGULAR_TIME_MOMENT: &str = "regular time moment";
pub const COND_POSITIVE_ORDERS: &str = "positive orders";

/// Checks the conditions for a unique formal solution. Report only; nothing
/// here errors.
pub fn validate(problem: &CauchyProblem, n_max: usize) -> ValidationReport {
    let spec = &problem.spec;
    let order = spec.order() as i64;

    let mut details = Vec::new();
    let mut passed = true;
    for term in spec.terms() {
        match term.ord_t() {
            None => details.push(format!(
                "term j={}, alpha={} has a zero coefficient and is ignored",
                term.j, term.alpha
            )),
            Some(ord) => {
                let needed = 0.max(term.j as i64 - order + 1);
                if (ord as i64) < needed {
                    passed = false;
                    details.push(format!(
                        "{COND_COEFFICIENT_ORDER} condition violated at term j={}, alpha={}: ord_t = {ord}, needs >= {needed}",
                        term.j, term.alpha
                    ));
                }
            }
        }
    }
    let coefficient_order = ConditionCheck {
        name: COND_COEFFICIENT_ORDER.into(),
        passed,
        details,
    };

    let finite = ConditionCheck {
        name: COND_FINITE_TERMS.into(),
        passed: true,
        details: vec![format!("{} terms", spec.terms().len())],
    };

    let m0 = spec.time_moment();
    let mut details = Vec::new();
    let normalised = match m0.exact_value(0) {
        Ok(Some(v)) => v == Rational::ONE,
        _ => false,
    };
    if !normalised {
        details.push("m0(0) != 1".to_string());
    }
    let regular = if crate::numeric::rational_to_f64(m0.order()) > 0.0 {
        match regularity_constants(m0, n_max.max(1)) {
            Ok((a, big_a)) => {
                details.push(format!(
                    "ratio constants a = {a:.6}, A = {big_a:.6} on n <= {}",
                    n_max.max(1)
                ));
                a > 0.0 && big_a.is_finite()
            }
            Err(e) => {
                details.push(e.to_string());
                false
            }
        }
    } else {
        details.push("time moment has order 0".to_string());
        false
    };
    let regularity = ConditionCheck {
        name: COND_REGULAR_TIME_MOMENT.into(),
        passed: normalised && regular,
        details,
    };

    let positive = orders_positive(spec);
    let orders = ConditionCheck {
        name: COND_POSITIVE_ORDERS.into(),
        passed: positive,
        details: if positive {
            Vec::new()
        } else {
            vec!["every moment function must have positive order".to_string()]
        },
    };

    ValidationReport {
        checks: vec![coefficient_order, finite, regularity, orders],
    }
}

/// Where the zero cutoff of `m0(n-p)/m0(n-p-j)` sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorConvention {
    /// Zero only for `n - p - j < 0`. Matches term-by-term differentiation.
    #[default]
    Negative,
    /// Zero for `n - p - j <= 0`. Kept so tests can show it breaks the residual.
    NonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Direct,
    ViaBorel,
}

/// `c_{j,α,p}` for one term, indexed by `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct TermCoefficients {
    pub j: u32,
    pub alpha: MultiIndex,
    pub q: u32,
    pub c: Vec<Scalar>,
}

#[derive(Debug, Clone)]
pub struct SolutionSeries {
    /// `u_n` with the full working degree `D + (n_max - n) max|α|`.
    pub u: TimeSeries,
    pub report_degree: u32,
    pub provenance: Provenance,
    /// `g_n = f_{n-M}`, zero for `n < M`.
    pub g: TimeSeries,
    pub c: Vec<TermCoefficients>,
}

impl SolutionSeries {
    pub fn n_max(&self) -> usize {
        self.u
            .n_max()
            .expect("a solution has at least one coefficient")
    }

    /// `u_n` truncated to the report degree.
    pub fn reported(&self) -> TimeSeries {
        self.u
            .map(Execution::Sequential, |c| c.truncate(self.report_degree))
    }
}

pub fn solve_formal(
    problem: &CauchyProblem,
    n_max: usize,
    report_degree: u32,
    exec: Execution,
) -> Result<SolutionSeries> {
    recurrence(
        problem,
        n_max,
        report_degree,
        exec,
        false,
        FactorConvention::Negative,
    )
}

pub fn solve_formal_with(
    problem: &CauchyProblem,
    n_max: usize,
    report_degree: u32,
    exec: Execution,
    convention: FactorConvention,
) -> Result<SolutionSeries> {
    recurrence(problem, n_max, report_degree, exec, false, convention)
}

/// The same recurrence with `|c|`, `M[g]` and `M[φ]`; every term then adds
/// with a nonnegative sign, so the result majorizes the formal solution.
pub fn solve_majorant(
    problem: &CauchyProblem,
    n_max: usize,
    report_degree: u32,
    exec: Execution,
) -> Result<SolutionSeries> {
    recurrence(
        problem,
        n_max,
        report_degree,
        exec,
        true,
        FactorConvention::Negative,
    )
}

struct Pair<'a> {
    alpha: &'a MultiIndex,
    k: usize,
    weight: Scalar,
}

fn recurrence(
    problem: &CauchyProblem,
    n_max: usize,
    report_degree: u32,
    exec: Execution,
    majorant: bool,
    convention: FactorConvention,
) -> Result<SolutionSeries> {
    let spec = &problem.spec;
    let dim = spec.dim();
    let order = spec.order() as usize;
    let max_alpha = spec.max_alpha();
    let mode = problem.mode;
    let out_mode = if majorant { mode.real_part() } else { mode };
    let cap0 = required_degree(spec, n_max, report_degree);
    let budget = |n: usize| report_degree + (n_max - n) as u32 * max_alpha;

    let t_table: MomentTable = moment_table(spec.time_moment(), mode, n_max)?;
    let ratios = ZRatios::new(spec.space_moments(), mode, cap0)?;
    let indices = MultiIndex::all_up_to(dim, cap0);
    let prefix = |degree: u32| indices.partition_point(|i| i.degree() <= degree);

    let mut c = Vec::new();
    for term in spec.terms() {
        let Some(q) = term.shift(spec.order()) else {
            continue;
        };
        if q < 1 {
            return Err(Error::NonPositiveShift {
                j: term.j,
                alpha: term.alpha.clone(),
                q,
            });
        }
        // c_p = a_{p - M + j}
        let offset = order as i64 - term.j as i64;
        let mut coeffs = Vec::new();
        for p in 0..=(term.coefficients.len() as i64 + offset).max(0) {
            let k = p - offset;
            let value = if k >= 0 && (k as usize) < term.coefficients.len() {
                let v = term.coefficients[k as usize].to_mode(mode)?;
                if majorant {
                    v.abs()
                } else {
                    v
                }
            } else {
                Scalar::zero(out_mode)
            };
            coeffs.push(value);
        }
        c.push(TermCoefficients {
            j: term.j,
            alpha: term.alpha.clone(),
            q: q as u32,
            c: coeffs,
        });
    }

    let prepare = |s: &MultiSeries, degree: u32| -> Result<MultiSeries> {
        let available = s.valid_degree();
        if available.is_none_or(|d| d < degree) {
            return Err(Error::DegreeBudget {
                needed: degree,
                available: available.unwrap_or(0),
            });
        }
        let s = s.truncate(degree);
        Ok(if majorant { s.majorant() } else { s })
    };

    let mut u: Vec<MultiSeries> = Vec::with_capacity(n_max + 1);
    let mut g: Vec<MultiSeries> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let degree = budget(n);
        if n < order {
            let phi = prepare(&problem.initial[n], degree)?;
            u.push(phi.scale(&(&Scalar::one(Mode::Exact) / t_table.get(n))));
            g.push(MultiSeries::zero(dim, degree, out_mode));
            continue;
        }
        let g_n = match problem.forcing_at(n - order) {
            Some(f) => prepare(f, degree)?,
            None => MultiSeries::zero(dim, degree, out_mode),
        };

        let mut pairs = Vec::new();
        for tc in &c {
            let j = tc.j as usize;
            for p in (tc.q as usize)..=n.min(tc.c.len().saturating_sub(1)) {
                let cp = &tc.c[p];
                if cp.is_zero() {
                    continue;
                }
                let k = n - p;
                let cut = match convention {
                    FactorConvention::Negative => k < j,
                    FactorConvention::NonPositive => k <= j,
                };
                if cut {
                    continue;
                }
                let weight = cp * &t_table.ratio(k, k - j);
                pairs.push(Pair {
                    alpha: &tc.alpha,
                    k,
                    weight: if majorant { weight.abs() } else { weight },
                });
            }
        }

        let pre = t_table.ratio(n - order, n);
        let domain = &indices[..prefix(degree)];
        let previous = &u;
        let values = exec::map(exec, domain, |beta| {
            let mut acc = g_n.coefficient(beta);
            for pair in &pairs {
                let gamma = beta.add(pair.alpha);
                let Some(v) = previous[pair.k].get(&gamma) else {
                    continue;
                };
                let term = &(&pair.weight * v) * &ratios.factor(&gamma, pair.alpha);
                acc = if majorant { &acc + &term } else { &acc - &term };
            }
            let value = &pre * &acc;
            (!value.is_zero()).then(|| (beta.clone(), value))
        });
        let coefficients: BTreeMap<MultiIndex, Scalar> = values.into_iter().flatten().collect();
        u.push(MultiSeries::from_parts(
            dim,
            degree,
            Some(degree),
            out_mode,
            coefficients,
        ));
        g.push(g_n);
    }

    Ok(SolutionSeries {
        u: TimeSeries::new(dim, out_mode, u)?,
        report_degree,
        provenance: Provenance::Direct,
        g: TimeSeries::new(dim, out_mode, g)?,
        c,
    })
}

/// `Γ_{s_j} / m_j`, the order-0 weights of the `z`-Borel transform that turns
/// the problem's space moments into `Γ_s`.
pub fn borel_weights(spec: &OperatorSpec) -> Result<Vec<MomentFunction>> {
    spec.space_moments()
        .iter()
        .map(|m| MomentFunction::quotient(&MomentFunction::gamma(m.order().clone())?, m))
        .collect()
}

/// The equivalent problem for `v = B_{Γ_s/m, z} u`: same coefficients, space
/// moments `Γ_{s_j}`, data `ψ_j = B φ_j` and forcing `g = B f`.
pub fn borel_problem(problem: &CauchyProblem) -> Result<CauchyProblem> {
    let weights = borel_weights(&problem.spec)?;
    let gammas = problem
        .spec
        .space_orders()
        .into_iter()
        .map(MomentFunction::gamma)
        .collect::<Result<Vec<_>>>()?;
    let spec = problem.spec.with_space_moments(gammas)?;
    let initial = problem
        .initial
        .iter()
        .map(|phi| borel_z(phi, &weights))
        .collect::<Result<Vec<_>>>()?;
    let forcing = borel_z_time(&problem.forcing, &weights, Execution::Sequential)?;
    CauchyProblem::new(spec, initial, Some(forcing), problem.mode)
}

/// Maps a solution of [`borel_problem`] back: `u = B^{-1} v`.
pub fn from_borel(
    original: &CauchyProblem,
    v: &SolutionSeries,
    exec: Execution,
) -> Result<SolutionSeries> {
    let weights = borel_weights(&original.spec)?;
    Ok(SolutionSeries {
        u: borel_z_time_inverse(&v.u, &weights, exec)?,
        report_degree: v.report_degree,
        provenance: Provenance::ViaBorel,
        g: borel_z_time_inverse(&v.g, &weights, exec)?,
        c: v.c.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct Residual {
    /// `P u - f` on the common `t`-range.
    pub equation: TimeSeries,
    /// `|P|(M[u]) + M[f]`: a size reference for every coefficient of the equation.
    pub scale: TimeSeries,
    /// `u_j m0(j) - φ_j` for `j < M`.
    pub initial: Vec<MultiSeries>,
    /// `M[φ_j]`.
    pub initial_scale: Vec<MultiSeries>,
}

impl Residual {
    /// Every coefficient in the valid window is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.equation
            .coefficients()
            .iter()
            .chain(&self.initial)
            .all(|s| s.iter_valid().all(|(_, v)| v.is_zero()))
    }

    /// Largest `|residual| / scale` over the valid window, as `log2`.
    /// `-inf` when the residual vanishes.
    pub fn max_relative_log2(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        let pairs = self
            .equation
            .coefficients()
            .iter()
            .zip(self.scale.coefficients())
            .chain(self.initial.iter().zip(&self.initial_scale));
        for (res, scale) in pairs {
            for (index, value) in res.iter_valid() {
                if value.is_zero() {
                    continue;
                }
                let size = scale.coefficient(index);
                let rel = if size.is_zero() {
                    f64::INFINITY
                } else {
                    (value.ln_abs() - size.ln_abs()) / std::f64::consts::LN_2
                };
                worst = worst.max(rel);
            }
        }
        worst
    }

    /// Number of `(n, α)` positions checked.
    pub fn window_size(&self) -> usize {
        self.equation
            .coefficients()
            .iter()
            .map(|s| {
                let d = s.valid_degree().map_or(0, |d| d as usize + 1);
                // positions up to the valid degree, counted per degree
                (0..d)
                    .map(|k| count_of_degree(s.dim(), k as u32))
                    .sum::<usize>()
            })
            .sum()
    }
}

fn count_of_degree(dim: usize, degree: u32) -> usize {
    // C(degree + dim - 1, dim - 1)
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 1..dim as u128 {
        num *= degree as u128 + i;
        den *= i;
    }
    (num / den) as usize
}

/// `P u - f` and the initial-condition mismatch, the oracle that a computed
/// solution really solves the problem.
pub fn residual(
    problem: &CauchyProblem,
    sol: &SolutionSeries,
    exec: Execution,
) -> Result<Residual> {
    let spec = &problem.spec;
    let order = spec.order() as usize;
    if sol.u.len() < order + 2 {
        return Err(Error::TimeOrder {
            needed: order + 2,
            available: sol.u.len(),
        });
    }
    let applied = apply_operator(spec, &sol.u, exec)?;
    let len = applied.len();
    let dim = spec.dim();
    let forcing: Vec<MultiSeries> = (0..len)
        .map(|n| match problem.forcing_at(n) {
            Some(f) => f.clone(),
            None => MultiSeries::zero(dim, applied.coefficients()[n].cap(), problem.mode),
        })
        .collect();
    let forcing = TimeSeries::new(dim, problem.mode, forcing)?;
    let equation = applied.sub(&forcing)?;
    let scale = apply_operator_abs(spec, &sol.u.majorant(), exec)?.add(&forcing.majorant())?;

    let t_table = moment_table(spec.time_moment(), problem.mode, order)?;
    let initial = (0..order)
        .map(|j| {
            let raw = sol.u.coefficients()[j].scale(t_table.get(j));
            raw.sub(&problem.initial[j])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Residual {
        equation,
        scale,
        initial,
        initial_scale: problem.initial.iter().map(MultiSeries::majorant).collect(),
    })
}
