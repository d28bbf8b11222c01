mod pipeline;
mod spec;
mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use mpde::analysis::{default_grid, verify_inequality, Lemma, Outcome as CheckOutcome};
use mpde::numeric::rational_to_fraction;
use mpde::polygon::{build_polygon, inverse_k1};
use mpde::Execution;

use pipeline::{Overrides, PolygonSummary, RunArgs};
use spec::ArithmeticMode;

#[derive(Parser)]
#[command(
    name = "mpde",
    version,
    about = "Formal solutions and Gevrey orders of linear moment PDEs"
)]
struct Cli {
    /// Run data-parallel loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate, solve and analyze a problem file, writing report.json,
    /// coeffs.csv, bounds.csv and polygon.svg.
    Run {
        spec: PathBuf,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        degree: Option<u32>,
        /// Bits of float precision; falls back to MPDE_PRECISION_BITS, then 256.
        #[arg(long)]
        precision: Option<usize>,
        /// Polydisc radius for the coefficient bounds, e.g. 1/1000.
        #[arg(long)]
        radius: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<ArithmeticMode>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the Newton polygon of a problem file as JSON.
    Polygon {
        spec: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Check the growth inequalities on their default grids.
    Lemmas {
        /// One of theta_lemma, factorial_lemma, stirling, gamma_ratio, moment_regularity.
        #[arg(long)]
        lemma: Option<String>,
        /// Write every checked point to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn polygon(path: &PathBuf, svg_path: Option<&PathBuf>) -> anyhow::Result<u8> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = spec::parse_file(&text).with_context(|| format!("{}", path.display()))?;
    let operator = spec::build_operator(&file).with_context(|| format!("{}", path.display()))?;
    let poly = build_polygon(&operator);
    let k1 = inverse_k1(&operator)?;

    #[derive(serde::Serialize)]
    struct Out {
        inverse_k1: String,
        #[serde(flatten)]
        polygon: PolygonSummary,
    }
    let out = Out {
        inverse_k1: rational_to_fraction(&k1),
        polygon: PolygonSummary::new(&poly),
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    if let Some(svg_path) = svg_path {
        fs::write(svg_path, svg::render_polygon_svg(&poly))
            .with_context(|| format!("writing {}", svg_path.display()))?;
    }
    Ok(0)
}

fn lemmas(id: Option<&str>, csv: Option<&PathBuf>, exec: Execution) -> anyhow::Result<u8> {
    let selected = match id {
        Some(id) => vec![Lemma::from_id(id).with_context(|| format!("unknown lemma {id:?}"))?],
        None => Lemma::ALL.to_vec(),
    };
    let mut rows = String::from("lemma,point,ln_lower,ln_value,ln_upper,outcome\n");
    let mut all_passed = true;
    for lemma in selected {
        let report = verify_inequality(lemma, &default_grid(lemma), exec)?;
        println!(
            "{}: {} passed, {} failed, {} outside hypotheses",
            lemma.id(),
            report.passed(),
            report.failed(),
            report.skipped()
        );
        all_passed &= report.all_passed();
        for check in &report.checks {
            let outcome = match check.outcome {
                CheckOutcome::Pass => "pass",
                CheckOutcome::Fail => "fail",
                CheckOutcome::Hypothesis => "skipped",
            };
            let lower = check.ln_lower.map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(
                rows,
                "{},{},{lower},{},{},{outcome}",
                lemma.id(),
                check.point,
                check.ln_value,
                check.ln_upper
            );
        }
    }
    if let Some(path) = csv {
        fs::write(path, rows).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if all_passed { 0 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = match &cli.command {
        Command::Run {
            spec,
            n_max,
            degree,
            precision,
            radius,
            mode,
            out,
        } => {
            let args = RunArgs {
                spec_path: spec.clone(),
                out: out.clone(),
                overrides: Overrides {
                    n_max: *n_max,
                    degree: *degree,
                    precision: *precision,
                    radius: radius.clone(),
                    mode: *mode,
                },
                exec,
            };
            pipeline::run(&args).map(|outcome| {
                if let pipeline::Outcome::Verdict(v) = &outcome {
                    println!(
                        "verdict: {}",
                        serde_json::to_string(v)
                            .unwrap_or_default()
                            .trim_matches('"')
                    );
                }
                outcome.exit_code()
            })
        }
        Command::Polygon { spec, svg } => polygon(spec, svg.as_ref()),
        Command::Lemmas { lemma, csv } => lemmas(lemma.as_deref(), csv.as_ref(), exec),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
