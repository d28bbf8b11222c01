//! Grid checks of the inequalities the growth estimates rest on.
//!
//! Everything is compared in the log domain at [`CHECK_PRECISION`] bits,
//! except the factorial inequality, which is exact.

use std::fmt;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::numeric::{
    factorial, float_from_int, float_from_rational, half_ln_two_pi, ln_gamma_rational,
    ln_rational_f64, rational, rational_is_negative, rational_is_positive, Float, Rational,
};

pub const CHECK_PRECISION: usize = 192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lemma {
    /// `Γ(1+x+b)/Γ(1+x) <= e (e/(1+a+b))^a Γ(1+x+a+b)/Γ(1+x)` with `x = s·α`.
    Theta,
    /// `(n-M)!/n! <= (M/n)^M` for `1 <= M <= n`.
    Factorial,
    /// `√(2π) x^{x-1/2} e^{-x} <= Γ(x) <= √(2π) x^{x-1/2} e^{-x+1}` for `x >= 1`.
    Stirling,
    /// `e^{-s-1} (1+x)^s <= Γ(1+x)/Γ(1+x-s) <= e (1+x)^s` for `x >= s >= 0`.
    GammaRatio,
    /// `e^{-s-1} s^s n^s <= Γ_s(n)/Γ_s(n-1) <= (1+1/s)^s e s^s n^s` for `s > 0`, `n >= 1`.
    MomentRegularity,
}

impl Lemma {
    pub const ALL: [Lemma; 5] = [
        Lemma::Theta,
        Lemma::Factorial,
        Lemma::Stirling,
        Lemma::GammaRatio,
        Lemma::MomentRegularity,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Lemma::Theta => "theta_lemma",
            Lemma::Factorial => "factorial_lemma",
            Lemma::Stirling => "stirling",
            Lemma::GammaRatio => "gamma_ratio",
            Lemma::MomentRegularity => "moment_regularity",
        }
    }

    pub fn from_id(id: &str) -> Option<Lemma> {
        Lemma::ALL.into_iter().find(|l| l.id() == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridPoint {
    Theta {
        a: Rational,
        b: Rational,
        s: Rational,
        l: u32,
    },
    Factorial {
        m: u32,
        n: u32,
    },
    Stirling {
        x: Rational,
    },
    GammaRatio {
        s: Rational,
        x: Rational,
    },
    MomentRegularity {
        s: Rational,
        n: u32,
    },
}

impl GridPoint {
    fn lemma(&self) -> Lemma {
        match self {
            GridPoint::Theta { .. } => Lemma::Theta,
            GridPoint::Factorial { .. } => Lemma::Factorial,
            GridPoint::Stirling { .. } => Lemma::Stirling,
            GridPoint::GammaRatio { .. } => Lemma::GammaRatio,
            GridPoint::MomentRegularity { .. } => Lemma::MomentRegularity,
        }
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridPoint::Theta { a, b, s, l } => write!(f, "a={a} b={b} s={s} l={l}"),
            GridPoint::Factorial { m, n } => write!(f, "M={m} n={n}"),
            GridPoint::Stirling { x } => write!(f, "x={x}"),
            GridPoint::GammaRatio { s, x } => write!(f, "s={s} x={x}"),
            GridPoint::MomentRegularity { s, n } => write!(f, "s={s} n={n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// The point lies outside the inequality's hypotheses and was not checked.
    Hypothesis,
}

/// One grid point. Sides are natural logs; `ln_lower` is `None` for
/// one-sided inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub point: GridPoint,
    pub ln_lower: Option<f64>,
    pub ln_value: f64,
    pub ln_upper: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub lemma: Lemma,
    pub checks: Vec<InequalityCheck>,
}

impl InequalityReport {
    fn count(&self, outcome: Outcome) -> usize {
        self.checks.iter().filter(|c| c.outcome == outcome).count()
    }

    pub fn passed(&self) -> usize {
        self.count(Outcome::Pass)
    }

    pub fn failed(&self) -> usize {
        self.count(Outcome::Fail)
    }

    pub fn skipped(&self) -> usize {
        self.count(Outcome::Hypothesis)
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }
}

fn r(p: i64, q: u64) -> Rational {
    rational(p, q)
}

fn orders() -> [Rational; 4] {
    [r(1, 2), r(1, 1), r(3, 2), r(2, 1)]
}

pub fn default_grid(lemma: Lemma) -> Vec<GridPoint> {
    match lemma {
        Lemma::Theta => {
            let mut grid = Vec::new();
            for a in [r(1, 2), r(1, 1), r(2, 1)] {
                for b in [r(0, 1), r(1, 2), r(1, 1)] {
                    for s in orders() {
                        for l in 0..=30 {
                            grid.push(GridPoint::Theta {
                                a: a.clone(),
                                b: b.clone(),
                                s: s.clone(),
                                l,
                            });
                        }
                    }
                }
            }
            grid
        }
        Lemma::Factorial => (1..=6)
            .flat_map(|m| (m..=500).map(move |n| GridPoint::Factorial { m, n }))
            .collect(),
        // 400 points from 1 to 200
        Lemma::Stirling => (0..400)
            .map(|k| GridPoint::Stirling {
                x: r(1, 1) + r(199 * k, 399),
            })
            .collect(),
        Lemma::GammaRatio => {
            let mut grid = Vec::new();
            for s in std::iter::once(r(0, 1)).chain(orders()) {
                // x = s, s + 1/4, ..., up to 100
                let steps = ((r(100, 1) - &s) * r(4, 1)).floor();
                let steps = i64::try_from(steps).expect("small grid");
                for k in 0..=steps {
                    grid.push(GridPoint::GammaRatio {
                        s: s.clone(),
                        x: &s + r(k, 4),
                    });
                }
            }
            grid
        }
        Lemma::MomentRegularity => orders()
            .into_iter()
            .flat_map(|s| (1..=500).map(move |n| GridPoint::MomentRegularity { s: s.clone(), n }))
            .collect(),
    }
}

pub fn verify_inequality(
    lemma: Lemma,
    grid: &[GridPoint],
    exec: Execution,
) -> Result<InequalityReport> {
    if let Some(p) = grid.iter().find(|p| p.lemma() != lemma) {
        return Err(Error::InvalidInput(format!(
            "grid point {p} does not belong to {}",
            lemma.id()
        )));
    }
    let checks = exec::map(exec, grid, check);
    Ok(InequalityReport { lemma, checks })
}

fn skipped(point: &GridPoint) -> InequalityCheck {
    InequalityCheck {
        point: point.clone(),
        ln_lower: None,
        ln_value: f64::NAN,
        ln_upper: f64::NAN,
        outcome: Outcome::Hypothesis,
    }
}

fn lg(x: &Rational) -> Float {
    ln_gamma_rational(x, CHECK_PRECISION)
}

fn ln(x: &Rational) -> Float {
    float_from_rational(x, CHECK_PRECISION).ln()
}

fn fl(x: &Rational) -> Float {
    float_from_rational(x, CHECK_PRECISION)
}

fn as_f64(x: &Float) -> f64 {
    x.to_f64().value()
}

fn compare(point: &GridPoint, lower: Option<Float>, value: Float, upper: Float) -> InequalityCheck {
    let ok = lower.as_ref().is_none_or(|lo| lo <= &value) && value <= upper;
    InequalityCheck {
        point: point.clone(),
        ln_lower: lower.as_ref().map(as_f64),
        ln_value: as_f64(&value),
        ln_upper: as_f64(&upper),
        outcome: if ok { Outcome::Pass } else { Outcome::Fail },
    }
}

fn check(point: &GridPoint) -> InequalityCheck {
    let one = Rational::ONE;
    match point {
        GridPoint::Theta { a, b, s, l } => {
            if !rational_is_positive(a) || rational_is_negative(b) || rational_is_negative(s) {
                return skipped(point);
            }
            let x = s * Rational::from(*l);
            let base = lg(&(&one + &x));
            let value = lg(&(&one + &x + b)) - &base;
            let upper =
                fl(&(&one + a)) - fl(a) * ln(&(&one + a + b)) + lg(&(&one + &x + a + b)) - &base;
            compare(point, None, value, upper)
        }
        GridPoint::Factorial { m, n } => {
            if *m < 1 || m > n {
                return skipped(point);
            }
            let lhs =
                Rational::from(factorial((n - m) as u64)) / Rational::from(factorial(*n as u64));
            let mut rhs = Rational::ONE;
            for _ in 0..*m {
                rhs *= Rational::from(*m) / Rational::from(*n);
            }
            InequalityCheck {
                point: point.clone(),
                ln_lower: None,
                ln_value: ln_rational_f64(&lhs),
                ln_upper: ln_rational_f64(&rhs),
                outcome: if lhs <= rhs {
                    Outcome::Pass
                } else {
                    Outcome::Fail
                },
            }
        }
        GridPoint::Stirling { x } => {
            if x < &one {
                return skipped(point);
            }
            let lower = half_ln_two_pi(CHECK_PRECISION) + fl(&(x - r(1, 2))) * ln(x) - fl(x);
            let upper = &lower + float_from_int(1, CHECK_PRECISION);
            compare(point, Some(lower), lg(x), upper)
        }
        GridPoint::GammaRatio { s, x } => {
            if rational_is_negative(s) || x < s {
                return skipped(point);
            }
            let value = lg(&(&one + x)) - lg(&(&one + x - s));
            let power = fl(s) * ln(&(&one + x));
            let lower = &power - fl(&(s + &one));
            let upper = power + float_from_int(1, CHECK_PRECISION);
            compare(point, Some(lower), value, upper)
        }
        GridPoint::MomentRegularity { s, n } => {
            if !rational_is_positive(s) || *n < 1 {
                return skipped(point);
            }
            let n_r = Rational::from(*n);
            let value = lg(&(&one + s * &n_r)) - lg(&(&one + s * (&n_r - &one)));
            let common = fl(s) * (ln(s) + ln(&n_r));
            let lower = &common - fl(&(s + &one));
            let upper =
                common + fl(s) * ln(&(&one + &one / s)) + float_from_int(1, CHECK_PRECISION);
            compare(point, Some(lower), value, upper)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(point: GridPoint) -> InequalityCheck {
        let lemma = point.lemma();
        verify_inequality(lemma, &[point], Execution::Sequential)
            .unwrap()
            .checks
            .remove(0)
    }

    #[test]
    fn factorial_example() {
        let c = single(GridPoint::Factorial { m: 2, n: 5 });
        assert_eq!(c.outcome, Outcome::Pass);
        assert!((c.ln_value.exp() - 0.05).abs() < 1e-12);
        assert!((c.ln_upper.exp() - 0.16).abs() < 1e-12);
        assert_eq!(
            single(GridPoint::Factorial { m: 3, n: 2 }).outcome,
            Outcome::Hypothesis
        );
    }

    #[test]
    fn gamma_ratio_order_zero() {
        let c = single(GridPoint::GammaRatio {
            s: r(0, 1),
            x: r(7, 2),
        });
        assert_eq!(c.outcome, Outcome::Pass);
        assert!(c.ln_value.abs() < 1e-30);
        assert!((c.ln_lower.unwrap() + 1.0).abs() < 1e-12 && (c.ln_upper - 1.0).abs() < 1e-12);
        let c = single(GridPoint::GammaRatio {
            s: r(2, 1),
            x: r(1, 1),
        });
        assert_eq!(c.outcome, Outcome::Hypothesis);
    }

    #[test]
    fn theta_example() {
        for l in 0..10 {
            let c = single(GridPoint::Theta {
                a: r(1, 1),
                b: r(0, 1),
                s: r(1, 1),
                l,
            });
            assert_eq!(c.outcome, Outcome::Pass);
            let rhs = std::f64::consts::E * (std::f64::consts::E / 2.0) * (1.0 + l as f64);
            assert!(c.ln_value.abs() < 1e-30 && (c.ln_upper - rhs.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn violated_inequality_fails() {
        let c = compare(
            &GridPoint::Stirling { x: r(1, 1) },
            None,
            float_from_int(2, CHECK_PRECISION),
            float_from_int(1, CHECK_PRECISION),
        );
        assert_eq!(c.outcome, Outcome::Fail);
    }

    #[test]
    fn mixed_grid_rejected() {
        assert!(verify_inequality(
            Lemma::Stirling,
            &[GridPoint::Factorial { m: 1, n: 1 }],
            Execution::Sequential
        )
        .is_err());
    }

    #[test]
    fn default_grids_have_expected_sizes() {
        assert_eq!(default_grid(Lemma::Theta).len(), 3 * 3 * 4 * 31);
        assert_eq!(default_grid(Lemma::Stirling).len(), 400);
        assert_eq!(
            default_grid(Lemma::Factorial).len(),
            (1..=6).map(|m| 501 - m).sum::<usize>()
        );
        let ratio = default_grid(Lemma::GammaRatio);
        assert!(ratio
            .iter()
            .all(|p| matches!(p, GridPoint::GammaRatio { s, x } if x >= s && x <= &r(100, 1))));
        for lemma in Lemma::ALL {
            assert_eq!(Lemma::from_id(lemma.id()), Some(lemma));
        }
    }
}
