//! Gevrey-order evidence from coefficient tables.
//!
//! Bound sequences are kept as natural logarithms (`-inf` for zero), since
//! the coefficients of a divergent solution leave the `f64` range quickly.

mod inequalities;

use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::moments::MomentFunction;
use crate::numeric::{rational_is_positive, rational_to_f64, rational_to_fraction, Rational};
use crate::operators::moment_diff_z;
use crate::polygon::{inverse_k1, OperatorSpec};
use crate::series::{weighted_degree, MultiIndex, MultiSeries};
use crate::solver::SolutionSeries;

pub use inequalities::{
    default_grid, verify_inequality, GridPoint, InequalityCheck, InequalityReport, Lemma, Outcome,
};

/// Smallest `n` used in root tests.
pub const ROOT_TEST_START: usize = 5;
/// Fits need at least this many nonzero entries.
pub const MIN_FIT_POINTS: usize = 8;
/// Tail max over middle max allowed before a root sequence counts as exploding.
pub const ROOT_TEST_SLACK: f64 = 1.05;

/// `ln b_n` with `b_n = sup_{|z_j| <= r} M[u_n](z)` over the reported degree.
pub fn coefficient_bounds(sol: &SolutionSeries, r: &Rational, exec: Execution) -> Vec<f64> {
    let reported = sol.reported();
    exec::map(exec, reported.coefficients(), |u| u.sup_bound(r).ln_abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GevreyFit {
    pub s_hat: f64,
    pub stderr: f64,
    pub log_h: f64,
    pub log_c: f64,
    pub window: (usize, usize),
    /// Number of nonzero entries the fit used.
    pub points: usize,
    /// Indices in the window where `b_n = 0`.
    pub zeros: Vec<usize>,
    /// Too few points or a singular design; the numbers are then meaningless.
    pub degenerate: bool,
}

/// Least squares `ln b_n ≈ ln C + n ln H + s ln Γ(n+1)` over the window,
/// skipping zero entries.
pub fn fit_gevrey_order(ln_b: &[f64], window: RangeInclusive<usize>) -> GevreyFit {
    let (lo, hi) = (
        *window.start(),
        (*window.end()).min(ln_b.len().saturating_sub(1)),
    );
    let mut rows = Vec::new();
    let mut zeros = Vec::new();
    for n in lo..=hi {
        match ln_b.get(n) {
            Some(&v) if v.is_finite() => rows.push((n, v)),
            Some(_) => zeros.push(n),
            None => {}
        }
    }
    let mut fit = GevreyFit {
        s_hat: f64::NAN,
        stderr: f64::NAN,
        log_h: f64::NAN,
        log_c: f64::NAN,
        window: (lo, hi),
        points: rows.len(),
        zeros,
        degenerate: true,
    };
    if rows.len() < MIN_FIT_POINTS {
        return fit;
    }
    let k = rows.len();
    let x = DMatrix::from_fn(k, 3, |i, col| {
        let n = rows[i].0 as f64;
        match col {
            0 => 1.0,
            1 => n,
            _ => ln_gamma(n + 1.0),
        }
    });
    let y = DVector::from_iterator(k, rows.iter().map(|r| r.1));
    let xtx = x.transpose() * &x;
    let Some(inverse) = xtx.try_inverse() else {
        return fit;
    };
    let beta = &inverse * x.transpose() * &y;
    let residual = &y - &x * &beta;
    let dof = (k - 3) as f64;
    let sigma2 = residual.norm_squared() / dof;
    let var_s = sigma2 * inverse[(2, 2)];
    if !beta.iter().all(|v| v.is_finite()) || var_s.is_nan() || var_s < 0.0 {
        return fit;
    }
    fit.log_c = beta[0];
    fit.log_h = beta[1];
    fit.s_hat = beta[2];
    fit.stderr = var_s.sqrt();
    fit.degenerate = false;
    fit
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootTest {
    pub middle_max: f64,
    pub tail_max: f64,
    pub bounded: bool,
}

/// Whether `x_n^{1/n}` stops growing: the max over the last third of the
/// window is at most [`ROOT_TEST_SLACK`] times the max over the middle third.
/// Only `n >= ROOT_TEST_START` with `x_n > 0` take part.
pub fn root_test(ln_x: &[f64], window: RangeInclusive<usize>) -> RootTest {
    let lo = (*window.start()).max(ROOT_TEST_START);
    let hi = (*window.end()).min(ln_x.len().saturating_sub(1));
    let roots: Vec<(usize, f64)> = (lo..=hi)
        .filter(|&n| ln_x[n].is_finite())
        .map(|n| (n, ln_x[n] / n as f64))
        .collect();
    if hi < lo || roots.is_empty() {
        return RootTest {
            middle_max: f64::NAN,
            tail_max: f64::NAN,
            bounded: true,
        };
    }
    let third = (hi - lo + 1) as f64 / 3.0;
    let middle_start = lo as f64 + third;
    let tail_start = lo as f64 + 2.0 * third;
    let max_over = |from: f64, to: f64| {
        roots
            .iter()
            .filter(|(n, _)| (*n as f64) >= from && (*n as f64) < to)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let middle = max_over(middle_start, tail_start).exp();
    let tail = max_over(tail_start, f64::INFINITY).exp();
    RootTest {
        middle_max: middle,
        tail_max: tail,
        bounded: tail <= ROOT_TEST_SLACK * middle || tail == 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GevreyBound {
    pub h: f64,
    pub log_c: f64,
    pub bounded: bool,
    pub roots: RootTest,
}

/// `H = max (b_n / n!^s)^{1/n}` over the window for `n >= 5`,
/// `C = max b_n / (H^n n!^s)`, and the root test on `(b_n / n!^s)^{1/n}`.
pub fn verify_gevrey_bound(
    ln_b: &[f64],
    s: &Rational,
    window: RangeInclusive<usize>,
) -> Result<GevreyBound> {
    if crate::numeric::rational_is_negative(s) {
        return Err(Error::NegativeOrder(s.clone()));
    }
    let s = rational_to_f64(s);
    let scaled: Vec<f64> = ln_b
        .iter()
        .enumerate()
        .map(|(n, v)| v - s * ln_gamma(n as f64 + 1.0))
        .collect();
    let lo = (*window.start()).max(ROOT_TEST_START);
    let hi = (*window.end()).min(scaled.len().saturating_sub(1));
    let log_h = (lo..=hi)
        .filter(|&n| scaled[n].is_finite())
        .map(|n| scaled[n] / n as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let log_h = if log_h.is_finite() { log_h } else { 0.0 };
    let log_c = (*window.start()..=hi)
        .filter(|&n| scaled[n].is_finite())
        .map(|n| scaled[n] - n as f64 * log_h)
        .fold(f64::NEG_INFINITY, f64::max);
    let roots = root_test(&scaled, window);
    Ok(GevreyBound {
        h: log_h.exp(),
        log_c,
        bounded: roots.bounded,
        roots,
    })
}

/// `ln( b_n · n!^{M s0} / Γ(1 + d n) )` with `d = M s0 + 1/k1`: the quantity
/// whose `n`-th roots must stay bounded when the intermediate bound holds.
pub fn lemma_bound_sequence(
    ln_b: &[f64],
    order: u32,
    s0: &Rational,
    inverse_k1: &Rational,
) -> Vec<f64> {
    let ms0 = order as f64 * rational_to_f64(s0);
    let d = ms0 + rational_to_f64(inverse_k1);
    ln_b.iter()
        .enumerate()
        .map(|(n, v)| {
            let n = n as f64;
            v + ms0 * ln_gamma(n + 1.0) - ln_gamma(1.0 + d * n)
        })
        .collect()
}

/// `h̃ = max_{1 <= |α| <= α_cap} ( sup_r ∂^α f / (sup_{r'} f · Γ(1 + s·α)) )^{1/|α|}`.
pub fn moment_derivative_bound_probe(
    f: &MultiSeries,
    moments: &[MomentFunction],
    r: &Rational,
    r_outer: &Rational,
    alpha_cap: u32,
) -> Result<f64> {
    if !rational_is_positive(r) || r >= r_outer {
        return Err(Error::InvalidInput(format!(
            "need 0 < r < r', got r={r}, r'={r_outer}"
        )));
    }
    if moments.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: moments.len(),
        });
    }
    let available = f.valid_degree().unwrap_or(0);
    if f.is_lost() || available < alpha_cap {
        return Err(Error::DegreeBudget {
            needed: alpha_cap,
            available,
        });
    }
    let outer = f.sup_bound(r_outer).ln_abs();
    if outer == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let s: Vec<Rational> = moments.iter().map(|m| m.order().clone()).collect();
    let mut h = 0.0f64;
    for alpha in MultiIndex::all_up_to(f.dim(), alpha_cap) {
        if alpha.is_zero() {
            continue;
        }
        let inner = moment_diff_z(f, moments, &alpha)?.sup_bound(r).ln_abs();
        if inner == f64::NEG_INFINITY {
            continue;
        }
        let x = rational_to_f64(&weighted_degree(&s, &alpha));
        let ln_ratio = inner - outer - ln_gamma(1.0 + x);
        h = h.max((ln_ratio / alpha.degree() as f64).exp());
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

/// Agreement allowed between `s_hat` and `1/k1` regardless of the stderr.
pub const CONSISTENT_TOLERANCE: f64 = 0.1;
/// Disagreement needed before an unbounded root test counts against `1/k1`.
pub const INCONSISTENT_GAP: f64 = 0.25;
/// Multiples of the fit's standard error also accepted as agreement.
pub const CONSISTENT_STDERR_MULTIPLE: f64 = 3.0;

pub fn verdict(fit: &GevreyFit, inverse_k1: &Rational, bounded: bool) -> Verdict {
    if fit.degenerate {
        return Verdict::Inconclusive;
    }
    let gap = (fit.s_hat - rational_to_f64(inverse_k1)).abs();
    if gap <= CONSISTENT_TOLERANCE.max(CONSISTENT_STDERR_MULTIPLE * fit.stderr) {
        Verdict::Consistent
    } else if gap > INCONSISTENT_GAP && !bounded {
        Verdict::Inconsistent
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    /// `p/q`.
    pub radius: String,
    pub ln_bounds: Vec<f64>,
    pub fit: GevreyFit,
    /// Exact `1/k1` as `p/q`.
    pub inverse_k1: String,
    /// `d = M s0 + 1/k1` as `p/q`.
    pub d: String,
    pub gevrey_bound: GevreyBound,
    pub lemma_bound: RootTest,
    pub verdict: Verdict,
}

/// Default fit window `[n_max/4, n_max]`.
pub fn default_window(n_max: usize) -> RangeInclusive<usize> {
    n_max / 4..=n_max
}

pub fn analyze(
    spec: &OperatorSpec,
    sol: &SolutionSeries,
    radius: &Rational,
    window: RangeInclusive<usize>,
    exec: Execution,
) -> Result<GrowthReport> {
    let k1 = inverse_k1(spec)?;
    let ln_b = coefficient_bounds(sol, radius, exec);
    let fit = fit_gevrey_order(&ln_b, window.clone());
    let gevrey_bound = verify_gevrey_bound(&ln_b, &k1, window.clone())?;
    let lemma = lemma_bound_sequence(&ln_b, spec.order(), spec.time_order(), &k1);
    let lemma_bound = root_test(&lemma, window);
    let d = Rational::from(spec.order()) * spec.time_order() + &k1;
    Ok(GrowthReport {
        radius: rational_to_fraction(radius),
        verdict: verdict(&fit, &k1, gevrey_bound.bounded),
        ln_bounds: ln_b,
        fit,
        inverse_k1: rational_to_fraction(&k1),
        d: rational_to_fraction(&d),
        gevrey_bound,
        lemma_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rational, Mode, Scalar};
    use crate::series::{generator_series, Generator};

    fn ln_seq(f: impl Fn(f64) -> f64, n_max: usize) -> Vec<f64> {
        (0..=n_max).map(|n| f(n as f64)).collect()
    }

    #[test]
    fn fit_recovers_synthetic_orders() {
        let fact = ln_seq(|n| ln_gamma(n + 1.0), 200);
        let fit = fit_gevrey_order(&fact, 20..=200);
        assert!((fit.s_hat - 1.0).abs() < 0.02, "{fit:?}");

        let pow2 = ln_seq(|n| n * 2f64.ln(), 200);
        let fit = fit_gevrey_order(&pow2, 20..=200);
        assert!(fit.s_hat.abs() < 0.02 && (fit.log_h - 2f64.ln()).abs() < 1e-6);

        let heat = ln_seq(|n| ln_gamma(2.0 * n + 1.0) - ln_gamma(n + 1.0), 200);
        let fit = fit_gevrey_order(&heat, 20..=200);
        assert!((fit.s_hat - 1.0).abs() < 0.05);
    }

    #[test]
    fn short_window_is_degenerate() {
        let fact = ln_seq(|n| ln_gamma(n + 1.0), 10);
        assert!(fit_gevrey_order(&fact, 5..=10).degenerate);
        let mut sparse = fact.clone();
        sparse[7] = f64::NEG_INFINITY;
        let fit = fit_gevrey_order(&sparse, 0..=10);
        assert_eq!(fit.zeros, vec![7]);
        assert_eq!(fit.points, 10);
    }

    #[test]
    fn gevrey_bound_examples() {
        let fact = ln_seq(|n| ln_gamma(n + 1.0), 200);
        let b = verify_gevrey_bound(&fact, &rational(1, 1), 0..=200).unwrap();
        assert!((b.h - 1.0).abs() < 1e-9 && b.log_c.abs() < 1e-9 && b.bounded);

        let squared = ln_seq(|n| 2.0 * ln_gamma(n + 1.0), 200);
        assert!(
            !verify_gevrey_bound(&squared, &rational(1, 1), 0..=200)
                .unwrap()
                .bounded
        );

        let heat = ln_seq(|n| ln_gamma(2.0 * n + 1.0) - ln_gamma(n + 1.0), 200);
        let b = verify_gevrey_bound(&heat, &rational(1, 1), 0..=200).unwrap();
        assert!(b.bounded && b.h > 3.5 && b.h <= 4.0);
    }

    #[test]
    fn bounds_of_trivial_solutions() {
        let zero = MultiSeries::zero(1, 2, Mode::Exact);
        let seq = [zero.clone(), zero.clone()];
        assert!(seq
            .iter()
            .all(|s| s.sup_bound(&rational(1, 2)).ln_abs() == f64::NEG_INFINITY));
        let one = MultiSeries::constant(Scalar::Exact(rational(1, 1)), 1, 2, Mode::Exact).unwrap();
        assert_eq!(one.sup_bound(&rational(1, 2)).ln_abs(), 0.0);
    }

    #[test]
    fn verdict_rules() {
        let mut fit = fit_gevrey_order(&ln_seq(|n| ln_gamma(n + 1.0), 100), 25..=100);
        assert_eq!(verdict(&fit, &rational(1, 1), true), Verdict::Consistent);
        assert_eq!(verdict(&fit, &rational(3, 2), false), Verdict::Inconsistent);
        assert_eq!(verdict(&fit, &rational(3, 2), true), Verdict::Inconclusive);
        assert_eq!(verdict(&fit, &rational(6, 5), false), Verdict::Inconclusive);
        fit.degenerate = true;
        assert_eq!(verdict(&fit, &rational(1, 1), true), Verdict::Inconclusive);
    }

    #[test]
    fn probe_examples() {
        let gamma1 = [MomentFunction::gamma(rational(1, 1)).unwrap()];
        let one = MultiSeries::constant(Scalar::Exact(rational(1, 1)), 1, 10, Mode::Exact).unwrap();
        let h = moment_derivative_bound_probe(&one, &gamma1, &rational(1, 4), &rational(1, 2), 5)
            .unwrap();
        assert_eq!(h, 0.0);

        let geo =
            generator_series(&Generator::Geometric(rational(1, 1)), 1, 80, Mode::Exact).unwrap();
        let h = moment_derivative_bound_probe(&geo, &gamma1, &rational(1, 4), &rational(1, 2), 20)
            .unwrap();
        assert!(h.is_finite() && h > 0.5 && h <= 4.0, "{h}");

        // f = z, Γ_{1/2}: ∂f = Γ(3/2), so h = 1/r'
        let half = [MomentFunction::gamma(rational(1, 2)).unwrap()];
        let z = MultiSeries::from_coefficients(
            1,
            6,
            Mode::real(128),
            [(MultiIndex::new(vec![1]), Scalar::Exact(rational(1, 1)))],
        )
        .unwrap();
        let h =
            moment_derivative_bound_probe(&z, &half, &rational(1, 4), &rational(1, 2), 3).unwrap();
        assert!((h - 2.0).abs() < 1e-12);

        assert!(
            moment_derivative_bound_probe(&geo, &gamma1, &rational(1, 2), &rational(1, 4), 3)
                .is_err()
        );
        assert!(matches!(
            moment_derivative_bound_probe(&geo, &gamma1, &rational(1, 4), &rational(1, 2), 81),
            Err(Error::DegreeBudget { .. })
        ));
    }

    #[test]
    fn lemma_bound_sequence_for_heat_is_flat() {
        let heat = ln_seq(|n| ln_gamma(2.0 * n + 1.0) - ln_gamma(n + 1.0), 100);
        let seq = lemma_bound_sequence(&heat, 1, &rational(1, 1), &rational(1, 1));
        assert!(seq.iter().all(|v| v.abs() < 1e-9));
        assert!(root_test(&seq, 25..=100).bounded);
    }
}
