//! Formal power-series solutions of Cauchy problems for linear moment
//! partial differential equations with time-dependent coefficients.
//!
//! The crate is layered bottom-up:
//!
//! - [`numeric`]: exact rationals, arbitrary-precision floats, `Γ`.
//! - [`moments`]: moment functions `m(n)` with a rational order.
//! - [`series`]: truncated multivariate power series, majorants, formal norms.
//! - [`operators`]: moment derivatives, moment Borel transforms, operator application.
//! - [`polygon`]: the operator specification and its Newton polygon.
//! - [`solver`]: validation, the Borel-transformed problem, the formal solution.
//! - [`analysis`]: growth fitting, Gevrey bounds and inequality checks.
//!
//! With the default `parallel` feature, data-parallel loops run on rayon;
//! see [`exec`].

pub mod analysis;
pub mod error;
pub mod exec;
pub mod moments;
pub mod numeric;
pub mod operators;
pub mod polygon;
pub mod series;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Execution;
pub use moments::{MomentFunction, MomentKind, MomentTable};
pub use numeric::{Float, Mode, Rational, Scalar};
pub use operators::TimeSeries;
pub use polygon::{NewtonPolygon, OperatorSpec, Term};
pub use series::{MultiIndex, MultiSeries};
pub use solver::{CauchyProblem, SolutionSeries};
