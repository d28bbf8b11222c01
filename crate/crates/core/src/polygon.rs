//! The operator `P = ∂^M_{m0,t} + Σ a_{j,α}(t) ∂^j_{m0,t} ∂^α_{m,z}` and its
//! Newton polygon.
//!
//! Each term contributes the point `(j s0 + s·α, ord_t(a_{j,α}) - j)` and the
//! leading term contributes `(M s0, -M)`. The polygon is the convex hull of
//! the upper-left quadrants attached to these points; its boundary is a
//! horizontal ray to the left, a chain of segments with increasing positive
//! slopes, and a vertical ray upwards.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::moments::MomentFunction;
use crate::numeric::{float_pow2, rational_is_positive, Mode, Rational, Scalar};
use crate::series::MultiIndex;

/// One term `a_{j,α}(t) ∂^j_{m0,t} ∂^α_{m,z}`; `a` is a polynomial in `t`
/// given by its coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub j: u32,
    pub alpha: MultiIndex,
    pub coefficients: Vec<Scalar>,
    /// Overrides the computed `ord_t(a)`.
    pub ord_override: Option<u32>,
}

impl Term {
    pub fn new(j: u32, alpha: MultiIndex, coefficients: Vec<Scalar>) -> Self {
        Term {
            j,
            alpha,
            coefficients,
            ord_override: None,
        }
    }

    /// Index of the first nonzero coefficient; in float mode "nonzero" means
    /// modulus above `2^-(prec/2)`.
    pub fn ord_t(&self) -> Option<u32> {
        if self.ord_override.is_some() {
            return self.ord_override;
        }
        self.coefficients
            .iter()
            .position(|c| match c.mode() {
                Mode::Exact => !c.is_zero(),
                m => {
                    let p = m.precision().expect("float mode");
                    let threshold = Scalar::Real(float_pow2(-((p / 2) as isize), 64));
                    !c.abs_le(&threshold)
                }
            })
            .map(|i| i as u32)
    }

    /// `q = ord_t(a) - j + M`.
    pub fn shift(&self, order: u32) -> Option<i64> {
        self.ord_t()
            .map(|o| o as i64 - self.j as i64 + order as i64)
    }
}

#[derive(Debug, Clone)]
pub struct OperatorSpec {
    order: u32,
    time_moment: MomentFunction,
    space_moments: Vec<MomentFunction>,
    terms: Vec<Term>,
}

impl OperatorSpec {
    /// Structural checks only: `M >= 1`, matching dimensions and no repeated
    /// `(j, α)`. The analytic conditions live in the solver's validation.
    pub fn new(
        order: u32,
        time_moment: MomentFunction,
        space_moments: Vec<MomentFunction>,
        terms: Vec<Term>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput(
                "the leading order M must be at least 1".into(),
            ));
        }
        if space_moments.is_empty() {
            return Err(Error::InvalidInput(
                "need at least one space variable".into(),
            ));
        }
        let dim = space_moments.len();
        let mut seen = BTreeSet::new();
        for term in &terms {
            if term.alpha.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: term.alpha.dim(),
                });
            }
            if !seen.insert((term.j, term.alpha.clone())) {
                return Err(Error::InvalidInput(format!(
                    "term j={}, alpha={} appears twice",
                    term.j, term.alpha
                )));
            }
        }
        Ok(OperatorSpec {
            order,
            time_moment,
            space_moments,
            terms,
        })
    }

    /// `M`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn time_moment(&self) -> &MomentFunction {
        &self.time_moment
    }

    pub fn space_moments(&self) -> &[MomentFunction] {
        &self.space_moments
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.space_moments.len()
    }

    pub fn time_order(&self) -> &Rational {
        self.time_moment.order()
    }

    pub fn space_orders(&self) -> Vec<Rational> {
        self.space_moments
            .iter()
            .map(|m| m.order().clone())
            .collect()
    }

    /// `max |α|` over the terms, zero without terms.
    pub fn max_alpha(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.alpha.degree())
            .max()
            .unwrap_or(0)
    }

    /// Same operator with different space moment functions.
    pub fn with_space_moments(&self, space_moments: Vec<MomentFunction>) -> Result<Self> {
        OperatorSpec::new(
            self.order,
            self.time_moment.clone(),
            space_moments,
            self.terms.clone(),
        )
    }

    fn s_dot(&self, alpha: &MultiIndex) -> Rational {
        crate::series::weighted_degree(&self.space_orders(), alpha)
    }
}

/// A point of the plane with exact coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slope {
    Finite(Rational),
    Infinite,
}

#[derive(Debug, Clone)]
pub struct NewtonPolygon {
    /// Generator points; the leading term's point comes first.
    pub points: Vec<Point>,
    /// Boundary vertices from left to right.
    pub vertices: Vec<Point>,
    /// Indices of terms dropped because their coefficient vanished.
    pub dropped_terms: Vec<usize>,
}

impl NewtonPolygon {
    /// Positive finite slopes `k_1 < ... < k_p`.
    pub fn slopes(&self) -> Vec<Rational> {
        self.vertices
            .windows(2)
            .map(|w| (&w[1].y - &w[0].y) / (&w[1].x - &w[0].x))
            .collect()
    }

    /// `k_0 = 0, k_1, ..., k_p, k_{p+1} = ∞`.
    pub fn all_slopes(&self) -> Vec<Slope> {
        let mut out = vec![Slope::Finite(Rational::ZERO)];
        out.extend(self.slopes().into_iter().map(Slope::Finite));
        out.push(Slope::Infinite);
        out
    }

    /// `1/k_1`, or zero when there is no finite positive slope.
    pub fn inverse_k1(&self) -> Rational {
        self.slopes()
            .first()
            .map(|k| Rational::ONE / k)
            .unwrap_or(Rational::ZERO)
    }
}

pub fn generator_points(spec: &OperatorSpec) -> (Vec<Point>, Vec<usize>) {
    let s0 = spec.time_order();
    let m = Rational::from(spec.order);
    let mut points = vec![Point::new(s0 * &m, -m.clone())];
    let mut dropped = Vec::new();
    for (i, term) in spec.terms.iter().enumerate() {
        match term.ord_t() {
            Some(ord) => {
                let x = s0 * Rational::from(term.j) + spec.s_dot(&term.alpha);
                let y = Rational::from(ord as i64 - term.j as i64);
                points.push(Point::new(x, y));
            }
            None => dropped.push(i),
        }
    }
    (points, dropped)
}

pub fn build_polygon(spec: &OperatorSpec) -> NewtonPolygon {
    let (points, dropped_terms) = generator_points(spec);
    let vertices = quadrant_hull(&points);
    NewtonPolygon {
        points,
        vertices,
        dropped_terms,
    }
}

pub fn polygon_slopes(poly: &NewtonPolygon) -> Vec<Rational> {
    poly.slopes()
}

/// Vertices of the finite part of the boundary of the convex hull of the
/// quadrants `{x' <= x, y' >= y}` attached to `points`.
pub fn quadrant_hull(points: &[Point]) -> Vec<Point> {
    if points.is_empty() {
        return Vec::new();
    }
    // lowest, then rightmost
    let start = points
        .iter()
        .min_by(|a, b| a.y.cmp(&b.y).then_with(|| b.x.cmp(&a.x)))
        .expect("nonempty")
        .clone();
    // rightmost, then lowest
    let end = points
        .iter()
        .max_by(|a, b| a.x.cmp(&b.x).then_with(|| b.y.cmp(&a.y)))
        .expect("nonempty")
        .clone();
    let mut candidates: Vec<&Point> = points
        .iter()
        .filter(|p| p.x >= start.x && p.y <= end.y)
        .collect();
    candidates.sort_by(|a, b| match a.x.cmp(&b.x) {
        Ordering::Equal => a.y.cmp(&b.y),
        o => o,
    });
    candidates.dedup();

    let mut hull: Vec<Point> = Vec::new();
    for p in candidates {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            if cross(a, b, p) <= Rational::ZERO {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p.clone());
    }
    hull
}

/// `(b - a) × (c - a)`; positive for a left turn.
fn cross(a: &Point, b: &Point, c: &Point) -> Rational {
    (&b.x - &a.x) * (&c.y - &a.y) - (&b.y - &a.y) * (&c.x - &a.x)
}

/// `1/k_1 = max{0, max_{(j,α)} (s0 (j - M) + s·α) / q_{j,α}}`.
///
/// Terms with an identically zero coefficient are skipped; a term with
/// `q < 1` is an error.
pub fn inverse_k1(spec: &OperatorSpec) -> Result<Rational> {
    let s0 = spec.time_order();
    let mut best = Rational::ZERO;
    for term in &spec.terms {
        let Some(q) = term.shift(spec.order) else {
            continue;
        };
        if q < 1 {
            return Err(Error::NonPositiveShift {
                j: term.j,
                alpha: term.alpha.clone(),
                q,
            });
        }
        let numerator = s0 * (Rational::from(term.j as i64) - Rational::from(spec.order))
            + spec.s_dot(&term.alpha);
        let ratio = numerator / Rational::from(q);
        if ratio > best {
            best = ratio;
        }
    }
    Ok(best)
}

/// Whether all moment orders are positive.
pub(crate) fn orders_positive(spec: &OperatorSpec) -> bool {
    rational_is_positive(spec.time_order())
        && spec
            .space_moments
            .iter()
            .all(|m| rational_is_positive(m.order()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational;

    fn gamma(p: i64, q: u64) -> MomentFunction {
        MomentFunction::gamma(rational(p, q)).unwrap()
    }

    fn pt(x: i64, y: i64) -> Point {
        Point::new(rational(x, 1), rational(y, 1))
    }

    fn poly_term(j: u32, alpha: u32, ord: usize) -> Term {
        let mut c = vec![Scalar::Exact(rational(0, 1)); ord];
        c.push(Scalar::Exact(rational(1, 1)));
        Term::new(j, MultiIndex::new(vec![alpha]), c)
    }

    #[test]
    fn pure_ode_polygon() {
        let spec = OperatorSpec::new(2, gamma(1, 1), vec![gamma(1, 1)], vec![]).unwrap();
        let poly = build_polygon(&spec);
        assert_eq!(poly.vertices, vec![pt(2, -2)]);
        assert!(poly.slopes().is_empty());
        assert_eq!(
            poly.all_slopes(),
            vec![Slope::Finite(rational(0, 1)), Slope::Infinite]
        );
        assert_eq!(inverse_k1(&spec).unwrap(), rational(0, 1));
    }

    #[test]
    fn heat_polygon() {
        let spec =
            OperatorSpec::new(1, gamma(1, 1), vec![gamma(1, 1)], vec![poly_term(0, 2, 0)]).unwrap();
        let poly = build_polygon(&spec);
        assert_eq!(poly.vertices, vec![pt(1, -1), pt(2, 0)]);
        assert_eq!(poly.slopes(), vec![rational(1, 1)]);
        assert_eq!(inverse_k1(&spec).unwrap(), rational(1, 1));
    }

    #[test]
    fn fractional_heat_inverse_k1() {
        let spec =
            OperatorSpec::new(1, gamma(1, 2), vec![gamma(1, 1)], vec![poly_term(0, 2, 0)]).unwrap();
        assert_eq!(inverse_k1(&spec).unwrap(), rational(3, 2));
        assert_eq!(build_polygon(&spec).inverse_k1(), rational(3, 2));
    }

    #[test]
    fn three_point_hull() {
        let hull = quadrant_hull(&[pt(1, -1), pt(2, 0), pt(3, 2)]);
        assert_eq!(hull, vec![pt(1, -1), pt(2, 0), pt(3, 2)]);
        let slopes: Vec<Rational> = hull
            .windows(2)
            .map(|w| (&w[1].y - &w[0].y) / (&w[1].x - &w[0].x))
            .collect();
        assert_eq!(slopes, vec![rational(1, 1), rational(2, 1)]);
    }

    #[test]
    fn dominated_points_are_ignored() {
        // (0, 3) left of the start, (2, 5) above the end, (2, 1) above the chord
        let hull = quadrant_hull(&[pt(1, -1), pt(3, 1), pt(0, 3), pt(2, 5), pt(2, 1)]);
        assert_eq!(hull, vec![pt(1, -1), pt(3, 1)]);
        // collinear points collapse
        let hull = quadrant_hull(&[pt(0, 0), pt(1, 1), pt(2, 2)]);
        assert_eq!(hull, vec![pt(0, 0), pt(2, 2)]);
    }

    #[test]
    fn zero_coefficient_terms_are_dropped() {
        let zero = Term::new(
            0,
            MultiIndex::new(vec![3]),
            vec![Scalar::Exact(rational(0, 1))],
        );
        let spec = OperatorSpec::new(1, gamma(1, 1), vec![gamma(1, 1)], vec![zero]).unwrap();
        let poly = build_polygon(&spec);
        assert_eq!(poly.dropped_terms, vec![0]);
        assert_eq!(poly.points.len(), 1);
    }

    #[test]
    fn non_positive_shift_is_reported() {
        let spec =
            OperatorSpec::new(1, gamma(1, 1), vec![gamma(1, 1)], vec![poly_term(1, 1, 0)]).unwrap();
        assert!(matches!(
            inverse_k1(&spec),
            Err(Error::NonPositiveShift { q: 0, .. })
        ));
    }

    #[test]
    fn duplicate_terms_rejected() {
        let terms = vec![poly_term(0, 2, 0), poly_term(0, 2, 1)];
        assert!(OperatorSpec::new(1, gamma(1, 1), vec![gamma(1, 1)], terms).is_err());
    }

    #[test]
    fn float_ord_uses_threshold() {
        let tiny = Scalar::Real(float_pow2(-200, 256));
        let t = Term::new(
            0,
            MultiIndex::new(vec![1]),
            vec![tiny, Scalar::from_int(1, Mode::real(256))],
        );
        assert_eq!(t.ord_t(), Some(1));
        let mut o = t.clone();
        o.ord_override = Some(3);
        assert_eq!(o.ord_t(), Some(3));
    }
}
