//! Problems and independent oracles shared by the integration tests.
#![allow(dead_code)]

use mpde::numeric::{factorial, rational};
use mpde::polygon::Point;
use mpde::series::Generator;
use mpde::solver::Forcing;
use mpde::{CauchyProblem, Mode, MomentFunction, MultiIndex, OperatorSpec, Rational, Scalar, Term};
use rand::Rng;

pub fn gamma(p: i64, q: u64) -> MomentFunction {
    MomentFunction::gamma(rational(p, q)).unwrap()
}

pub fn exact(p: i64) -> Scalar {
    Scalar::Exact(rational(p, 1))
}

/// `∂_{m0,t} u = ∂²_z u`, written as `∂_t u + (-1) ∂²_z u = 0`, `u(0,z) = 1/(1-z)`.
pub fn heat_spec(s0: Rational) -> OperatorSpec {
    OperatorSpec::new(
        1,
        MomentFunction::gamma(s0).unwrap(),
        vec![gamma(1, 1)],
        vec![Term::new(0, MultiIndex::new(vec![2]), vec![exact(-1)])],
    )
    .unwrap()
}

pub fn heat_problem(s0: Rational, n_max: usize, degree: u32, mode: Mode) -> CauchyProblem {
    CauchyProblem::from_generators(
        heat_spec(s0),
        &[Generator::Geometric(rational(1, 1))],
        &Forcing::Zero,
        n_max,
        degree,
        mode,
    )
    .unwrap()
}

/// `∂_t u = 1/(1-t)`, `u(0) = 0`.
pub fn ode_problem(n_max: usize, degree: u32, mode: Mode) -> CauchyProblem {
    let spec = OperatorSpec::new(1, gamma(1, 1), vec![gamma(1, 1)], vec![]).unwrap();
    let forcing = Forcing::Separable {
        time: mpde::solver::TimeProfile::Geometric(rational(1, 1)),
        space: Generator::Polynomial(vec![rational(1, 1)]),
    };
    CauchyProblem::from_generators(spec, &[Generator::Zero], &forcing, n_max, degree, mode).unwrap()
}

/// `Δ^n φ / m0(n)` at `z = 0` coefficients, by differentiating the polynomial
/// `φ` twice per step: the Taylor coefficients of `∂_{m0,t} u = ∂²_z u`
/// written out by hand.
pub fn heat_taylor_oracle(phi: &[Rational], n: usize, m0_n: &Rational) -> Vec<Rational> {
    let mut p = phi.to_vec();
    for _ in 0..2 * n {
        p = p
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * Rational::from(k as u64))
            .collect();
    }
    p.into_iter().map(|c| c / m0_n).collect()
}

pub fn factorial_rational(n: u64) -> Rational {
    Rational::from(factorial(n))
}

/// Vertices of the lower-right boundary of the quadrant hull found by
/// brute force: for a set of directions `λ > 0` between consecutive critical
/// slopes, the unique minimizer of `y - λ x` over the points.
pub fn hull_oracle(points: &[Point]) -> Vec<Point> {
    let mut critical: Vec<Rational> = Vec::new();
    for a in points {
        for b in points {
            if b.x > a.x {
                let slope = (&b.y - &a.y) / (&b.x - &a.x);
                if slope > Rational::ZERO {
                    critical.push(slope);
                }
            }
        }
    }
    critical.sort();
    critical.dedup();
    let mut lambdas = Vec::new();
    match (critical.first(), critical.last()) {
        (Some(lo), Some(hi)) => {
            lambdas.push(lo / Rational::from(2u8));
            for w in critical.windows(2) {
                lambdas.push((&w[0] + &w[1]) / Rational::from(2u8));
            }
            lambdas.push(hi * Rational::from(2u8));
        }
        _ => lambdas.push(Rational::ONE),
    }
    let mut vertices: Vec<Point> = Vec::new();
    for lambda in lambdas {
        let best = points
            .iter()
            .map(|p| &p.y - &lambda * &p.x)
            .min()
            .expect("nonempty");
        let winner = points
            .iter()
            .find(|p| &p.y - &lambda * &p.x == best)
            .expect("attained")
            .clone();
        if !vertices.contains(&winner) {
            vertices.push(winner);
        }
    }
    vertices.sort_by(|a, b| a.x.cmp(&b.x));
    vertices
}

/// A random operator satisfying the coefficient-order condition, with
/// integer orders so exact arithmetic is possible when `exact_orders`.
pub fn random_spec(rng: &mut impl Rng, exact_orders: bool) -> OperatorSpec {
    let dim = rng.random_range(1..=2usize);
    let order = rng.random_range(1..=2u32);
    let pick_order = |rng: &mut dyn rand::RngCore| -> Rational {
        if exact_orders {
            rational(rng.random_range(1..=2), 1)
        } else {
            rational(rng.random_range(1..=4), 2)
        }
    };
    let s0 = pick_order(rng);
    let space: Vec<MomentFunction> = (0..dim)
        .map(|_| MomentFunction::gamma(pick_order(rng)).unwrap())
        .collect();
    let mut terms: Vec<Term> = Vec::new();
    for _ in 0..rng.random_range(0..=3) {
        let j = rng.random_range(0..=order + 1);
        let alpha = MultiIndex::new((0..dim).map(|_| rng.random_range(0..=2u32)).collect());
        if terms.iter().any(|t| t.j == j && t.alpha == alpha) {
            continue;
        }
        // q = ord - j + M >= 1
        let min_ord = (j as i64 - order as i64 + 1).max(0) as usize;
        let ord = min_ord + rng.random_range(0..=1usize);
        let mut coefficients = vec![Scalar::Exact(Rational::ZERO); ord];
        for _ in 0..rng.random_range(1..=3) {
            let mut c = rng.random_range(-3..=3i64);
            if coefficients.len() == ord && c == 0 {
                c = 1;
            }
            coefficients.push(exact(c));
        }
        terms.push(Term::new(j, alpha, coefficients));
    }
    OperatorSpec::new(order, MomentFunction::gamma(s0).unwrap(), space, terms).unwrap()
}

pub fn random_problem(
    rng: &mut impl Rng,
    exact_orders: bool,
    n_max: usize,
    degree: u32,
    mode: Mode,
) -> CauchyProblem {
    let spec = random_spec(rng, exact_orders);
    let pick = |rng: &mut dyn rand::RngCore| match rng.random_range(0..3) {
        0 => Generator::Geometric(rational(rng.random_range(-2..=2), rng.random_range(1..=3))),
        1 => Generator::Polynomial(
            (0..4)
                .map(|_| rational(rng.random_range(-5..=5), 1))
                .collect(),
        ),
        _ => Generator::Zero,
    };
    let initial: Vec<Generator> = (0..spec.order()).map(|_| pick(rng)).collect();
    let forcing = match rng.random_range(0..3) {
        0 => Forcing::Zero,
        1 => Forcing::Separable {
            time: mpde::solver::TimeProfile::Geometric(rational(rng.random_range(-2..=2), 1)),
            space: pick(rng),
        },
        _ => Forcing::Explicit((0..3).map(|_| pick(rng)).collect()),
    };
    CauchyProblem::from_generators(spec, &initial, &forcing, n_max, degree, mode).unwrap()
}
