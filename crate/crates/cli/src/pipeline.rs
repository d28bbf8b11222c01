//! validate → polygon → solve → analyze, and the files written along the way.

use std::fmt::Write as _;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use mpde::analysis::{
    analyze, default_window, GevreyBound, GevreyFit, RootTest, Verdict, CONSISTENT_STDERR_MULTIPLE,
    CONSISTENT_TOLERANCE, INCONSISTENT_GAP, MIN_FIT_POINTS, ROOT_TEST_SLACK, ROOT_TEST_START,
};
use mpde::numeric::{rational_to_fraction, rational_to_string};
use mpde::polygon::{build_polygon, inverse_k1};
use mpde::solver::{residual, solve_formal, validate, CauchyProblem, ValidationReport};
use mpde::{Execution, Mode, NewtonPolygon, OperatorSpec, Rational, SolutionSeries};
use serde::Serialize;

use crate::spec::{self, ArithmeticMode, ProblemFile};
use crate::svg::render_polygon_svg;

pub const DEFAULT_N_MAX: usize = 100;
pub const DEFAULT_DEGREE: u32 = 2;
pub const DEFAULT_PRECISION: usize = 256;
pub const DEFAULT_RADIUS: &str = "1/1000";
pub const PRECISION_ENV: &str = "MPDE_PRECISION_BITS";

/// Command-line values; each one overrides the file's `[run]` block.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub n_max: Option<usize>,
    pub degree: Option<u32>,
    pub precision: Option<usize>,
    pub radius: Option<String>,
    pub mode: Option<ArithmeticMode>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub n_max: usize,
    pub report_degree: u32,
    pub mode: ArithmeticMode,
    /// `None` in exact mode.
    pub precision: Option<usize>,
    pub radius: String,
    pub window: [usize; 2],
}

#[derive(Debug)]
pub enum Outcome {
    Verdict(Verdict),
    /// Validation failed; a partial report was written.
    Invalid,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match self {
            Outcome::Verdict(Verdict::Consistent) => 0,
            Outcome::Invalid => 1,
            Outcome::Verdict(Verdict::Inconsistent) => 2,
            Outcome::Verdict(Verdict::Inconclusive) => 3,
        }
    }
}

fn integer_orders(spec: &OperatorSpec) -> bool {
    std::iter::once(spec.time_order().clone())
        .chain(spec.space_orders())
        .all(|s| s.denominator().is_one())
}

fn env_precision() -> anyhow::Result<Option<usize>> {
    match std::env::var(PRECISION_ENV) {
        Ok(text) => {
            let bits = text
                .trim()
                .parse::<usize>()
                .with_context(|| format!("{PRECISION_ENV}: not a bit count: {text:?}"))?;
            Ok(Some(bits))
        }
        Err(_) => Ok(None),
    }
}

pub fn settings(
    file: &ProblemFile,
    spec: &OperatorSpec,
    flags: &Overrides,
) -> anyhow::Result<(Settings, Rational)> {
    let run = &file.run;
    let n_max = flags.n_max.or(run.n_max).unwrap_or(DEFAULT_N_MAX);
    let report_degree = flags.degree.or(run.report_degree).unwrap_or(DEFAULT_DEGREE);
    let mode = flags.mode.or(run.mode).unwrap_or(if integer_orders(spec) {
        ArithmeticMode::Exact
    } else {
        ArithmeticMode::Float
    });
    let precision = match flags.precision.or(run.precision) {
        Some(bits) => bits,
        None => env_precision()?.unwrap_or(DEFAULT_PRECISION),
    };
    if precision < 16 {
        bail!("precision: at least 16 bits needed, got {precision}");
    }
    let radius_text = flags
        .radius
        .clone()
        .or(run.radius.clone())
        .unwrap_or(DEFAULT_RADIUS.to_string());
    let radius = spec::rational_field("run.radius", &radius_text)?;
    if radius <= Rational::ZERO {
        bail!("run.radius: must be positive, got {radius_text}");
    }
    let window = match run.window {
        Some([lo, hi]) => {
            if lo > hi || hi > n_max {
                bail!("run.window: [{lo}, {hi}] must satisfy lo <= hi <= n_max = {n_max}");
            }
            [lo, hi]
        }
        None => {
            let w = default_window(n_max);
            [*w.start(), *w.end()]
        }
    };
    let settings = Settings {
        n_max,
        report_degree,
        mode,
        precision: (mode == ArithmeticMode::Float).then_some(precision),
        radius: rational_to_fraction(&radius),
        window,
    };
    Ok((settings, radius))
}

impl Settings {
    fn arithmetic(&self) -> Mode {
        match self.precision {
            Some(bits) => Mode::real(bits),
            None => Mode::Exact,
        }
    }

    fn window(&self) -> RangeInclusive<usize> {
        self.window[0]..=self.window[1]
    }
}

#[derive(Debug, Serialize)]
pub struct PolygonSummary {
    pub points: Vec<[String; 2]>,
    pub vertices: Vec<[String; 2]>,
    pub slopes: Vec<String>,
    pub dropped_terms: Vec<usize>,
}

impl PolygonSummary {
    pub fn new(poly: &NewtonPolygon) -> Self {
        let pair = |p: &mpde::polygon::Point| [rational_to_string(&p.x), rational_to_string(&p.y)];
        PolygonSummary {
            points: poly.points.iter().map(pair).collect(),
            vertices: poly.vertices.iter().map(pair).collect(),
            slopes: poly.slopes().iter().map(rational_to_string).collect(),
            dropped_terms: poly.dropped_terms.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct ConditionEntry<'a> {
    name: &'a str,
    passed: bool,
    details: &'a [String],
}

#[derive(Debug, Serialize)]
struct ResidualSummary {
    exact_zero: bool,
    max_relative_log2: f64,
    window: usize,
}

/// Engineering choices behind the verdict, not derived quantities.
#[derive(Debug, Serialize)]
struct Thresholds {
    consistent_tolerance: f64,
    consistent_stderr_multiple: f64,
    inconsistent_gap: f64,
    root_test_start: usize,
    root_test_slack: f64,
    min_fit_points: usize,
}

const THRESHOLDS: Thresholds = Thresholds {
    consistent_tolerance: CONSISTENT_TOLERANCE,
    consistent_stderr_multiple: CONSISTENT_STDERR_MULTIPLE,
    inconsistent_gap: INCONSISTENT_GAP,
    root_test_start: ROOT_TEST_START,
    root_test_slack: ROOT_TEST_SLACK,
    min_fit_points: MIN_FIT_POINTS,
};

#[derive(Debug, Serialize)]
struct Growth<'a> {
    fit: &'a GevreyFit,
    gevrey_bound: &'a GevreyBound,
    lemma_bound: &'a RootTest,
    d: &'a str,
    thresholds: &'a Thresholds,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    settings: &'a Settings,
    validation: Vec<ConditionEntry<'a>>,
    /// Exact `1/k1` as `p/q`, present whenever the operator admits one.
    inverse_k1: Option<String>,
    polygon: PolygonSummary,
    residual: Option<ResidualSummary>,
    growth: Option<Growth<'a>>,
    verdict: Option<Verdict>,
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_report(out: &Path, report: &Report) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_file(&out.join("report.json"), &text)
}

fn coeffs_csv(sol: &SolutionSeries) -> String {
    let u = sol.reported();
    let mut out = String::new();
    let header: Vec<String> = (1..=u.dim()).map(|j| format!("alpha_{j}")).collect();
    let _ = writeln!(out, "n,{},re,im", header.join(","));
    for (n, coefficient) in u.coefficients().iter().enumerate() {
        for (index, value) in coefficient.iter() {
            let (re, im) = value.text_parts();
            let parts: Vec<String> = index.parts().iter().map(|a| a.to_string()).collect();
            let _ = writeln!(out, "{n},{},{re},{im}", parts.join(","));
        }
    }
    out
}

/// `e^x` in scientific notation without overflowing `f64`.
pub fn exp_scientific(ln: f64) -> String {
    if ln == f64::NEG_INFINITY {
        return "0".to_string();
    }
    let log10 = ln / std::f64::consts::LN_10;
    let exponent = log10.floor();
    let mut mantissa = 10f64.powf(log10 - exponent);
    let mut exponent = exponent as i64;
    if mantissa >= 9.999_999_999_999_5 {
        mantissa = 1.0;
        exponent += 1;
    }
    format!("{mantissa:.12}e{exponent}")
}

fn bounds_csv(ln_b: &[f64]) -> String {
    let mut out = String::from("n,b_n,ln_b_n\n");
    for (n, ln) in ln_b.iter().enumerate() {
        let _ = writeln!(out, "{n},{},{ln}", exp_scientific(*ln));
    }
    out
}

pub struct RunArgs {
    pub spec_path: PathBuf,
    pub out: PathBuf,
    pub overrides: Overrides,
    pub exec: Execution,
}

pub fn run(args: &RunArgs) -> anyhow::Result<Outcome> {
    let path = &args.spec_path;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = spec::parse_file(&text).with_context(|| format!("{}", path.display()))?;
    let operator = spec::build_operator(&file).with_context(|| format!("{}", path.display()))?;
    let (initial, forcing) =
        spec::build_data(&file).with_context(|| format!("{}", path.display()))?;
    let (settings, radius) = settings(&file, &operator, &args.overrides)?;

    let problem = CauchyProblem::from_generators(
        operator,
        &initial,
        &forcing,
        settings.n_max,
        settings.report_degree,
        settings.arithmetic(),
    )
    .with_context(|| format!("{}: building the problem", path.display()))?;
    let spec = problem.spec();

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let poly = build_polygon(spec);
    write_file(&args.out.join("polygon.svg"), &render_polygon_svg(&poly))?;

    let validation = validate(&problem, settings.n_max);
    let k1 = inverse_k1(spec).ok();
    let mut report = Report {
        settings: &settings,
        validation: conditions(&validation),
        inverse_k1: k1.as_ref().map(rational_to_fraction),
        polygon: PolygonSummary::new(&poly),
        residual: None,
        growth: None,
        verdict: None,
    };
    if !validation.passed() {
        write_report(&args.out, &report)?;
        for check in validation.failures() {
            for detail in &check.details {
                eprintln!("error: {detail}");
            }
            if check.details.is_empty() {
                eprintln!("error: {} condition violated", check.name);
            }
        }
        return Ok(Outcome::Invalid);
    }

    let sol = solve_formal(&problem, settings.n_max, settings.report_degree, args.exec)?;
    let res = residual(&problem, &sol, args.exec)?;
    report.residual = Some(ResidualSummary {
        exact_zero: res.is_zero(),
        max_relative_log2: res.max_relative_log2(),
        window: res.window_size(),
    });
    let growth = analyze(spec, &sol, &radius, settings.window(), args.exec)?;
    report.growth = Some(Growth {
        fit: &growth.fit,
        gevrey_bound: &growth.gevrey_bound,
        lemma_bound: &growth.lemma_bound,
        d: &growth.d,
        thresholds: &THRESHOLDS,
    });
    report.verdict = Some(growth.verdict);

    write_file(&args.out.join("coeffs.csv"), &coeffs_csv(&sol))?;
    write_file(&args.out.join("bounds.csv"), &bounds_csv(&growth.ln_bounds))?;
    write_report(&args.out, &report)?;
    Ok(Outcome::Verdict(growth.verdict))
}

fn conditions(report: &ValidationReport) -> Vec<ConditionEntry<'_>> {
    report
        .checks
        .iter()
        .map(|c| ConditionEntry {
            name: &c.name,
            passed: c.passed,
            details: &c.details,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_notation() {
        assert_eq!(exp_scientific(f64::NEG_INFINITY), "0");
        assert_eq!(exp_scientific(0.0), "1.000000000000e0");
        assert_eq!(
            exp_scientific(10.0 * std::f64::consts::LN_10),
            "1.000000000000e10"
        );
        assert_eq!(exp_scientific(-2f64.ln()), "5.000000000000e-1");
        assert!(
            exp_scientific(1000.0 * std::f64::consts::LN_10).ends_with("e999")
                || exp_scientific(1000.0 * std::f64::consts::LN_10).ends_with("e1000")
        );
    }
}
