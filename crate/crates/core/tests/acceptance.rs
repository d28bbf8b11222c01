//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use mpde::analysis::{
    analyze, default_grid, default_window, fit_gevrey_order, lemma_bound_sequence, root_test,
    verify_inequality, Lemma,
};
use mpde::numeric::{rational, rational_to_fraction};
use mpde::polygon::{build_polygon, generator_points, inverse_k1};
use mpde::series::Generator;
use mpde::solver::{borel_problem, from_borel, residual, solve_formal, solve_majorant, Forcing};
use mpde::{
    CauchyProblem, Execution, Mode, MomentFunction, MultiIndex, OperatorSpec, Rational, Scalar,
    SolutionSeries, Term,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

const N_MAX: usize = 200;
const DEGREE: u32 = 2;
const PRECISION: usize = 256;

type Outcome = Result<String, String>;

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn radius() -> Rational {
    rational(1, 1000)
}

struct Shared {
    heat: (CauchyProblem, SolutionSeries),
    fractional: (CauchyProblem, SolutionSeries),
}

fn heat_end_to_end(shared: &Shared, seconds: f64) -> Outcome {
    let (problem, sol) = &shared.heat;
    let phi: Vec<Rational> = vec![Rational::ONE; (DEGREE + 2 * 50 + 1) as usize];
    for n in 0..=50u64 {
        let expected = factorial_rational(2 * n) / factorial_rational(n);
        let u_n = &sol.u.coefficients()[n as usize];
        ensure(
            u_n.coefficient(&MultiIndex::new(vec![0])) == Scalar::Exact(expected),
            || format!("u_{n}(0) differs from (2n)!/n!"),
        )?;
        let oracle = heat_taylor_oracle(
            &phi[..(DEGREE as usize + 2 * n as usize + 1)],
            n as usize,
            &factorial_rational(n),
        );
        for (l, value) in oracle.iter().enumerate() {
            ensure(
                u_n.coefficient(&MultiIndex::new(vec![l as u32])) == Scalar::Exact(value.clone()),
                || format!("u_{n} coefficient z^{l} differs from repeated differentiation"),
            )?;
        }
    }
    let k1 = inverse_k1(problem.spec()).map_err(|e| e.to_string())?;
    ensure(k1 == Rational::ONE, || format!("1/k1 = {k1}"))?;
    let report = analyze(
        problem.spec(),
        sol,
        &radius(),
        default_window(N_MAX),
        Execution::default(),
    )
    .map_err(|e| e.to_string())?;
    let s = report.fit.s_hat;
    ensure((0.95..=1.05).contains(&s), || format!("s_hat = {s}"))?;
    ensure(seconds < 60.0, || format!("solve took {seconds:.1}s"))?;
    Ok(format!(
        "exact through n=50, 1/k1 = 1, s_hat = {s:.4}, solve {seconds:.2}s"
    ))
}

fn fractional(shared: &Shared) -> Outcome {
    let (problem, sol) = &shared.fractional;
    let k1 = inverse_k1(problem.spec()).map_err(|e| e.to_string())?;
    ensure(k1 == rational(3, 2), || format!("1/k1 = {k1}"))?;
    let report = analyze(
        problem.spec(),
        sol,
        &radius(),
        default_window(N_MAX),
        Execution::default(),
    )
    .map_err(|e| e.to_string())?;
    let s = report.fit.s_hat;
    ensure((1.4..=1.6).contains(&s), || format!("s_hat = {s}"))?;
    Ok(format!(
        "1/k1 = {}, s_hat = {s:.4}",
        rational_to_fraction(&k1)
    ))
}

fn pure_ode() -> Outcome {
    let problem = ode_problem(N_MAX, 0, Mode::Exact);
    let k1 = inverse_k1(problem.spec()).map_err(|e| e.to_string())?;
    ensure(k1 == Rational::ZERO, || format!("1/k1 = {k1}"))?;
    let sol = solve_formal(&problem, N_MAX, 0, Execution::default()).map_err(|e| e.to_string())?;
    for n in 1..=N_MAX {
        let expected = Scalar::Exact(rational(1, n as u64));
        ensure(
            sol.u.coefficients()[n].coefficient(&MultiIndex::new(vec![0])) == expected,
            || format!("u_{n} != 1/{n}"),
        )?;
    }
    let report = analyze(
        problem.spec(),
        &sol,
        &radius(),
        default_window(N_MAX),
        Execution::default(),
    )
    .map_err(|e| e.to_string())?;
    let s = report.fit.s_hat;
    ensure(s <= 0.05, || format!("s_hat = {s}"))?;
    Ok(format!("1/k1 = 0, s_hat = {s:.4}"))
}

fn polygon_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut with_slopes = 0;
    for i in 0..100 {
        let spec = random_spec(&mut rng, false);
        let poly = build_polygon(&spec);
        let formula = inverse_k1(&spec).map_err(|e| e.to_string())?;
        let from_polygon = poly
            .slopes()
            .iter()
            .min()
            .map(|k| Rational::ONE / k)
            .unwrap_or(Rational::ZERO);
        ensure(formula == from_polygon, || {
            format!("spec {i}: formula {formula} vs polygon {from_polygon}")
        })?;
        let (points, _) = generator_points(&spec);
        ensure(poly.vertices == hull_oracle(&points), || {
            format!("spec {i}: vertices differ from brute force")
        })?;
        with_slopes += usize::from(!poly.slopes().is_empty());
    }
    Ok(format!(
        "100 specs agree ({with_slopes} with a finite slope)"
    ))
}

/// Shipped shapes plus seeded random problems.
fn exact_problems() -> Vec<CauchyProblem> {
    let mut problems = vec![
        heat_problem(rational(1, 1), 12, 3, Mode::Exact),
        ode_problem(12, 3, Mode::Exact),
    ];
    problems.push(heat_problem(rational(2, 1), 12, 3, Mode::Exact));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        problems.push(random_problem(&mut rng, true, 10, 2, Mode::Exact));
    }
    problems
}

fn float_problems() -> Vec<CauchyProblem> {
    let mode = Mode::real(PRECISION);
    let mut problems = vec![
        heat_problem(rational(1, 2), 12, 3, mode),
        heat_problem(rational(1, 1), 12, 3, mode),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        problems.push(random_problem(&mut rng, false, 10, 2, mode));
    }
    problems
}

fn residual_oracle() -> Outcome {
    let exact = exact_problems();
    for (i, problem) in exact.iter().enumerate() {
        let sol = solve_formal(problem, 10, 2, Execution::default())
            .map_err(|e| format!("problem {i}: {e}"))?;
        let r = residual(problem, &sol, Execution::default())
            .map_err(|e| format!("problem {i}: {e}"))?;
        ensure(r.is_zero(), || {
            format!("exact problem {i}: nonzero residual")
        })?;
    }
    let mut worst = f64::NEG_INFINITY;
    let floats = float_problems();
    for (i, problem) in floats.iter().enumerate() {
        let sol = solve_formal(problem, 10, 2, Execution::default())
            .map_err(|e| format!("problem {i}: {e}"))?;
        let r = residual(problem, &sol, Execution::default())
            .map_err(|e| format!("problem {i}: {e}"))?;
        let rel = r.max_relative_log2();
        worst = worst.max(rel);
        ensure(rel < -224.0, || {
            format!("float problem {i}: relative residual 2^{rel:.1}")
        })?;
    }
    Ok(format!(
        "{} exact problems vanish, {} float problems worst 2^{worst:.1}",
        exact.len(),
        floats.len()
    ))
}

fn borel_round_trip() -> Outcome {
    let product = MomentFunction::product(&gamma(1, 1), &gamma(1, 1));
    let heat_like = OperatorSpec::new(
        1,
        gamma(1, 1),
        vec![product.clone()],
        vec![Term::new(
            0,
            MultiIndex::new(vec![1]),
            vec![exact(-1), exact(2)],
        )],
    )
    .map_err(|e| e.to_string())?;
    let mixed = OperatorSpec::new(
        2,
        gamma(2, 1),
        vec![product, gamma(1, 1)],
        vec![
            Term::new(1, MultiIndex::new(vec![1, 0]), vec![exact(3)]),
            Term::new(
                2,
                MultiIndex::new(vec![0, 1]),
                vec![exact(0), exact(1), exact(-1)],
            ),
        ],
    )
    .map_err(|e| e.to_string())?;
    let cases = [
        (
            heat_like,
            vec![Generator::GevreyFactorial(rational(1, 1))],
            Forcing::Zero,
        ),
        (
            mixed,
            vec![
                Generator::Geometric(rational(1, 2)),
                Generator::Polynomial(vec![rational(1, 1), rational(-2, 1)]),
            ],
            Forcing::Explicit(vec![Generator::Geometric(rational(1, 1))]),
        ),
    ];
    for (i, (spec, initial, forcing)) in cases.into_iter().enumerate() {
        let problem = CauchyProblem::from_generators(spec, &initial, &forcing, 12, 3, Mode::Exact)
            .map_err(|e| e.to_string())?;
        let direct =
            solve_formal(&problem, 12, 3, Execution::default()).map_err(|e| e.to_string())?;
        let transformed = borel_problem(&problem).map_err(|e| e.to_string())?;
        let v =
            solve_formal(&transformed, 12, 3, Execution::default()).map_err(|e| e.to_string())?;
        let back = from_borel(&problem, &v, Execution::default()).map_err(|e| e.to_string())?;
        ensure(direct.reported() == back.reported(), || {
            format!("case {i}: round trip differs")
        })?;
        ensure(
            direct.u.coefficients().iter().any(|c| !c.is_empty()),
            || format!("case {i}: trivial solution"),
        )?;
    }
    Ok("2 problems agree coefficientwise".into())
}

fn majorant_domination(shared: &Shared) -> Outcome {
    let mut problems = exact_problems();
    problems.extend(float_problems());
    let mut count = 0;
    for (i, problem) in problems.iter().enumerate() {
        let sol = solve_formal(problem, 10, 2, Execution::default()).map_err(|e| e.to_string())?;
        let maj =
            solve_majorant(problem, 10, 2, Execution::default()).map_err(|e| e.to_string())?;
        for (n, (m, u)) in maj
            .u
            .coefficients()
            .iter()
            .zip(sol.u.coefficients())
            .enumerate()
        {
            ensure(m.majorizes(u).map_err(|e| e.to_string())?, || {
                format!("problem {i}, n={n}")
            })?;
        }
        count += 1;
    }
    let (problem, sol) = &shared.heat;
    let maj =
        solve_majorant(problem, N_MAX, DEGREE, Execution::default()).map_err(|e| e.to_string())?;
    for (n, (m, u)) in maj
        .u
        .coefficients()
        .iter()
        .zip(sol.u.coefficients())
        .enumerate()
    {
        ensure(m.majorizes(u).map_err(|e| e.to_string())?, || {
            format!("heat, n={n}")
        })?;
    }
    Ok(format!("{} problems, every n", count + 1))
}

fn inequality_suites() -> Outcome {
    let mut summary = Vec::new();
    for lemma in Lemma::ALL {
        let report = verify_inequality(lemma, &default_grid(lemma), Execution::default())
            .map_err(|e| e.to_string())?;
        ensure(report.all_passed() && report.skipped() == 0, || {
            format!(
                "{}: {} failed, {} outside hypotheses",
                lemma.id(),
                report.failed(),
                report.skipped()
            )
        })?;
        summary.push(format!("{} {}", lemma.id(), report.passed()));
    }
    Ok(summary.join(", "))
}

fn fit_calibration() -> Outcome {
    let mut worst: f64 = 0.0;
    for sigma in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let ln_b: Vec<f64> = (0..=200)
            .map(|n| ln_gamma(1.0 + sigma * n as f64))
            .collect();
        let fit = fit_gevrey_order(&ln_b, 50..=200);
        let err = (fit.s_hat - sigma).abs();
        worst = worst.max(err);
        ensure(err <= 0.03, || {
            format!("sigma {sigma}: s_hat {}", fit.s_hat)
        })?;
    }
    Ok(format!("worst error {worst:.4}"))
}

fn intermediate_bound(shared: &Shared) -> Outcome {
    let mut details = Vec::new();
    for (name, (problem, sol)) in [("heat", &shared.heat), ("fractional", &shared.fractional)] {
        let spec = problem.spec();
        let k1 = inverse_k1(spec).map_err(|e| e.to_string())?;
        let ln_b: Vec<f64> = sol
            .reported()
            .coefficients()
            .iter()
            .map(|u| u.sup_bound(&Rational::ZERO).ln_abs())
            .collect();
        let seq = lemma_bound_sequence(&ln_b, spec.order(), spec.time_order(), &k1);
        let test = root_test(&seq, default_window(N_MAX));
        ensure(test.bounded, || {
            format!(
                "{name}: tail {} vs middle {}",
                test.tail_max, test.middle_max
            )
        })?;
        details.push(format!(
            "{name} tail/middle {:.4}",
            test.tail_max / test.middle_max
        ));
    }
    Ok(details.join(", "))
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let start = Instant::now();
    let heat = heat_problem(rational(1, 1), N_MAX, DEGREE, Mode::Exact);
    let heat_sol = solve_formal(&heat, N_MAX, DEGREE, Execution::default()).expect("heat solve");
    let heat_seconds = start.elapsed().as_secs_f64();
    let fractional_problem = heat_problem(rational(1, 2), N_MAX, DEGREE, Mode::real(PRECISION));
    let fractional_sol = solve_formal(&fractional_problem, N_MAX, DEGREE, Execution::default())
        .expect("fractional solve");
    let shared = Shared {
        heat: (heat, heat_sol),
        fractional: (fractional_problem, fractional_sol),
    };

    let criteria: Vec<(&str, Criterion)> = vec![
        (
            "heat-type end to end",
            Box::new(|| heat_end_to_end(&shared, heat_seconds)),
        ),
        ("fractional-time variant", Box::new(|| fractional(&shared))),
        ("pure ODE control", Box::new(pure_ode)),
        ("polygon and formula agree", Box::new(polygon_formula)),
        ("residual oracle", Box::new(residual_oracle)),
        ("Borel round trip", Box::new(borel_round_trip)),
        (
            "majorant domination",
            Box::new(|| majorant_domination(&shared)),
        ),
        ("inequality suites", Box::new(inequality_suites)),
        ("fit calibration", Box::new(fit_calibration)),
        (
            "intermediate bound shape",
            Box::new(|| intermediate_bound(&shared)),
        ),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
