//! The TOML problem file.
//!
//! ```toml
//! [moments.t]
//! kind = "gamma"
//! order = "1/2"
//!
//! [moments.z]
//! kind = "gamma"
//! order = "1"
//!
//! [operator]
//! order = 1
//! time_moment = "t"
//! space_moments = ["z"]
//!
//! [[operator.terms]]
//! j = 0
//! alpha = [2]
//! coefficients = ["-1"]
//!
//! [data]
//! initial = [{ kind = "geometric", c = "1" }]
//! forcing = { kind = "zero" }
//!
//! [run]
//! n_max = 200
//! report_degree = 2
//! mode = "float"
//! ```
//!
//! Rationals are strings (`"3/2"`, `"-1"`, `"0.25"`) so nothing is lost to
//! floating point.

use std::collections::{BTreeMap, HashMap};

use mpde::numeric::parse_rational;
use mpde::series::Generator;
use mpde::solver::{Forcing, TimeProfile};
use mpde::{MomentFunction, MultiIndex, OperatorSpec, Rational, Scalar, Term};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

fn field_error(field: impl Into<String>, message: impl ToString) -> SpecError {
    SpecError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub moments: BTreeMap<String, MomentDecl>,
    pub operator: OperatorDecl,
    pub data: DataDecl,
    #[serde(default)]
    pub run: RunDecl,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MomentDecl {
    Gamma { order: String },
    Product { of: [String; 2] },
    Quotient { of: [String; 2] },
    Tabulated { order: String, values: Vec<String> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDecl {
    pub order: u32,
    pub time_moment: MomentRef,
    pub space_moments: Vec<MomentRef>,
    #[serde(default)]
    pub terms: Vec<TermDecl>,
}

/// A declared name, or an inline order meaning `Γ_s`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MomentRef {
    Name(String),
    Gamma { gamma: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDecl {
    pub j: u32,
    pub alpha: Vec<u32>,
    pub coefficients: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataDecl {
    pub initial: Vec<GeneratorDecl>,
    #[serde(default)]
    pub forcing: ForcingDecl,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratorDecl {
    Zero,
    Geometric { c: String },
    Polynomial { coefficients: Vec<String> },
    Gevrey { sigma: String },
    Terms { terms: Vec<EntryDecl> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDecl {
    pub alpha: Vec<u32>,
    pub value: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ForcingDecl {
    #[default]
    Zero,
    Separable {
        time: TimeDecl,
        space: GeneratorDecl,
    },
    Explicit {
        coefficients: Vec<GeneratorDecl>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TimeDecl {
    Geometric { c: String },
    Polynomial { coefficients: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticMode {
    Exact,
    Float,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDecl {
    pub n_max: Option<usize>,
    pub report_degree: Option<u32>,
    pub precision: Option<usize>,
    pub radius: Option<String>,
    pub window: Option<[usize; 2]>,
    pub mode: Option<ArithmeticMode>,
}

pub fn parse_file(text: &str) -> Result<ProblemFile, SpecError> {
    Ok(toml::from_str(text)?)
}

pub fn rational_field(field: &str, text: &str) -> Result<Rational, SpecError> {
    parse_rational(text).map_err(|e| field_error(field, e))
}

fn rationals(field: &str, values: &[String]) -> Result<Vec<Rational>, SpecError> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| rational_field(&format!("{field}[{i}]"), v))
        .collect()
}

/// Resolves declarations, following product/quotient references.
fn resolve_moments(
    decls: &BTreeMap<String, MomentDecl>,
) -> Result<HashMap<String, MomentFunction>, SpecError> {
    fn visit(
        name: &str,
        decls: &BTreeMap<String, MomentDecl>,
        done: &mut HashMap<String, MomentFunction>,
        stack: &mut Vec<String>,
    ) -> Result<MomentFunction, SpecError> {
        if let Some(m) = done.get(name) {
            return Ok(m.clone());
        }
        let field = format!("moments.{name}");
        if stack.iter().any(|s| s == name) {
            return Err(field_error(field, "circular reference"));
        }
        let decl = decls
            .get(name)
            .ok_or_else(|| field_error(&field, "undeclared moment function"))?;
        stack.push(name.to_string());
        let m = match decl {
            MomentDecl::Gamma { order } => {
                MomentFunction::gamma(rational_field(&format!("{field}.order"), order)?)
                    .map_err(|e| field_error(&field, e))?
            }
            MomentDecl::Product { of: [a, b] } => {
                let a = visit(a, decls, done, stack)?;
                let b = visit(b, decls, done, stack)?;
                MomentFunction::product(&a, &b)
            }
            MomentDecl::Quotient { of: [a, b] } => {
                let a = visit(a, decls, done, stack)?;
                let b = visit(b, decls, done, stack)?;
                MomentFunction::quotient(&a, &b).map_err(|e| field_error(&field, e))?
            }
            MomentDecl::Tabulated { order, values } => MomentFunction::tabulated(
                rational_field(&format!("{field}.order"), order)?,
                rationals(&format!("{field}.values"), values)?,
            )
            .map_err(|e| field_error(&field, e))?,
        };
        stack.pop();
        done.insert(name.to_string(), m.clone());
        Ok(m)
    }

    let mut done = HashMap::new();
    for name in decls.keys() {
        visit(name, decls, &mut done, &mut Vec::new())?;
    }
    Ok(done)
}

fn moment_ref(
    field: &str,
    r: &MomentRef,
    resolved: &HashMap<String, MomentFunction>,
) -> Result<MomentFunction, SpecError> {
    match r {
        MomentRef::Name(name) => resolved
            .get(name)
            .cloned()
            .ok_or_else(|| field_error(field, format!("unknown moment function {name:?}"))),
        MomentRef::Gamma { gamma } => {
            MomentFunction::gamma(rational_field(&format!("{field}.gamma"), gamma)?)
                .map_err(|e| field_error(field, e))
        }
    }
}

pub fn build_operator(file: &ProblemFile) -> Result<OperatorSpec, SpecError> {
    let resolved = resolve_moments(&file.moments)?;
    let op = &file.operator;
    let time = moment_ref("operator.time_moment", &op.time_moment, &resolved)?;
    let space = op
        .space_moments
        .iter()
        .enumerate()
        .map(|(i, r)| moment_ref(&format!("operator.space_moments[{i}]"), r, &resolved))
        .collect::<Result<Vec<_>, _>>()?;
    let terms = op
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let field = format!("operator.terms[{i}]");
            let coefficients = rationals(&format!("{field}.coefficients"), &t.coefficients)?
                .into_iter()
                .map(Scalar::Exact)
                .collect();
            Ok(Term::new(
                t.j,
                MultiIndex::new(t.alpha.clone()),
                coefficients,
            ))
        })
        .collect::<Result<Vec<_>, SpecError>>()?;
    OperatorSpec::new(op.order, time, space, terms).map_err(|e| field_error("operator", e))
}

fn generator(field: &str, decl: &GeneratorDecl) -> Result<Generator, SpecError> {
    Ok(match decl {
        GeneratorDecl::Zero => Generator::Zero,
        GeneratorDecl::Geometric { c } => {
            Generator::Geometric(rational_field(&format!("{field}.c"), c)?)
        }
        GeneratorDecl::Polynomial { coefficients } => {
            Generator::Polynomial(rationals(&format!("{field}.coefficients"), coefficients)?)
        }
        GeneratorDecl::Gevrey { sigma } => {
            Generator::GevreyFactorial(rational_field(&format!("{field}.sigma"), sigma)?)
        }
        GeneratorDecl::Terms { terms } => Generator::Terms(
            terms
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let value = rational_field(&format!("{field}.terms[{i}].value"), &e.value)?;
                    Ok((MultiIndex::new(e.alpha.clone()), Scalar::Exact(value)))
                })
                .collect::<Result<Vec<_>, SpecError>>()?,
        ),
    })
}

pub fn build_data(file: &ProblemFile) -> Result<(Vec<Generator>, Forcing), SpecError> {
    let initial = file
        .data
        .initial
        .iter()
        .enumerate()
        .map(|(i, g)| generator(&format!("data.initial[{i}]"), g))
        .collect::<Result<Vec<_>, _>>()?;
    let forcing = match &file.data.forcing {
        ForcingDecl::Zero => Forcing::Zero,
        ForcingDecl::Separable { time, space } => Forcing::Separable {
            time: match time {
                TimeDecl::Geometric { c } => {
                    TimeProfile::Geometric(rational_field("data.forcing.time.c", c)?)
                }
                TimeDecl::Polynomial { coefficients } => TimeProfile::Polynomial(rationals(
                    "data.forcing.time.coefficients",
                    coefficients,
                )?),
            },
            space: generator("data.forcing.space", space)?,
        },
        ForcingDecl::Explicit { coefficients } => Forcing::Explicit(
            coefficients
                .iter()
                .enumerate()
                .map(|(i, g)| generator(&format!("data.forcing.coefficients[{i}]"), g))
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    Ok((initial, forcing))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAT: &str = r#"
[moments.one]
kind = "gamma"
order = "1"

[operator]
order = 1
time_moment = "one"
space_moments = [{ gamma = "1" }]

[[operator.terms]]
j = 0
alpha = [2]
coefficients = ["-1"]

[data]
initial = [{ kind = "geometric", c = "1" }]
"#;

    #[test]
    fn parses_heat() {
        let file = parse_file(HEAT).unwrap();
        let op = build_operator(&file).unwrap();
        assert_eq!(op.order(), 1);
        assert_eq!(op.terms().len(), 1);
        let (initial, forcing) = build_data(&file).unwrap();
        assert_eq!(initial.len(), 1);
        assert_eq!(forcing, Forcing::Zero);
    }

    #[test]
    fn bad_rational_names_the_field() {
        let text = HEAT.replace(r#"["-1"]"#, r#"["-1", "x/2"]"#);
        let err = build_operator(&parse_file(&text).unwrap()).unwrap_err();
        assert!(
            err.to_string()
                .starts_with("operator.terms[0].coefficients[1]:"),
            "{err}"
        );
    }

    #[test]
    fn unknown_reference_and_cycles() {
        let text = HEAT.replace(r#"time_moment = "one""#, r#"time_moment = "two""#);
        let err = build_operator(&parse_file(&text).unwrap()).unwrap_err();
        assert!(err.to_string().contains("operator.time_moment"));

        let text = format!("{HEAT}\n[moments.a]\nkind = \"product\"\nof = [\"a\", \"one\"]\n");
        let err = build_operator(&parse_file(&text).unwrap()).unwrap_err();
        assert!(err.to_string().contains("circular"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = parse_file("[operator\norder = 1").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = parse_file(&HEAT.replace("j = 0", "j = \"zero\"")).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }
}
