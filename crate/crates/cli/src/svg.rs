//! Newton polygon as SVG. Output depends only on the polygon, so it can be
//! compared byte for byte.

use std::fmt::Write;

use mpde::numeric::{rational_to_f64, rational_to_string};
use mpde::polygon::Point;
use mpde::NewtonPolygon;

const UNIT: f64 = 48.0;
const MARGIN: f64 = 1.0;

struct Frame {
    x_min: f64,
    y_max: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(points: &[Point]) -> Self {
        // axes are always in view
        let (mut x_min, mut x_max, mut y_min, mut y_max) = (0f64, 0f64, 0f64, 0f64);
        for p in points {
            let (x, y) = (rational_to_f64(&p.x), rational_to_f64(&p.y));
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
        Frame {
            x_min: x_min - MARGIN,
            y_max: y_max + MARGIN,
            width: x_max - x_min + 2.0 * MARGIN,
            height: y_max - y_min + 2.0 * MARGIN,
        }
    }

    fn px(&self, x: f64) -> f64 {
        (x - self.x_min) * UNIT
    }

    fn py(&self, y: f64) -> f64 {
        (self.y_max - y) * UNIT
    }

    fn point(&self, p: &Point) -> (f64, f64) {
        (
            self.px(rational_to_f64(&p.x)),
            self.py(rational_to_f64(&p.y)),
        )
    }
}

fn coords(list: &[(f64, f64)]) -> String {
    list.iter()
        .map(|(x, y)| format!("{x:.4},{y:.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render_polygon_svg(poly: &NewtonPolygon) -> String {
    let frame = Frame::new(&poly.points);
    let (w, h) = (frame.width * UNIT, frame.height * UNIT);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.4} {h:.4}" width="{w:.4}" height="{h:.4}">"#
    );

    // boundary: a ray in from the left, the finite edges, a ray up
    let mut boundary = Vec::new();
    if let (Some(first), Some(last)) = (poly.vertices.first(), poly.vertices.last()) {
        let (_, y0) = frame.point(first);
        let (xn, _) = frame.point(last);
        boundary.push((0.0, y0));
        boundary.extend(poly.vertices.iter().map(|v| frame.point(v)));
        boundary.push((xn, 0.0));

        let mut region = vec![(0.0, 0.0)];
        region.extend(boundary.iter().copied());
        let _ = writeln!(
            out,
            r##"  <polygon class="region" points="{}" fill="#dde8f4" stroke="none"/>"##,
            coords(&region)
        );
    }

    let (ox, oy) = (frame.px(0.0), frame.py(0.0));
    let _ = writeln!(
        out,
        r##"  <line class="axis" x1="0.0000" y1="{oy:.4}" x2="{w:.4}" y2="{oy:.4}" stroke="#444" stroke-width="1"/>"##
    );
    let _ = writeln!(
        out,
        r##"  <line class="axis" x1="{ox:.4}" y1="0.0000" x2="{ox:.4}" y2="{h:.4}" stroke="#444" stroke-width="1"/>"##
    );

    if !boundary.is_empty() {
        let _ = writeln!(
            out,
            r##"  <polyline class="boundary" points="{}" fill="none" stroke="#1f4e8c" stroke-width="2"/>"##,
            coords(&boundary)
        );
    }

    for p in &poly.points {
        let (x, y) = frame.point(p);
        let _ = writeln!(
            out,
            r##"  <circle class="point" cx="{x:.4}" cy="{y:.4}" r="4" fill="#c0392b"/>"##
        );
    }

    for (i, (w, k)) in poly.vertices.windows(2).zip(poly.slopes()).enumerate() {
        let (x0, y0) = frame.point(&w[0]);
        let (x1, y1) = frame.point(&w[1]);
        let (mx, my) = ((x0 + x1) / 2.0 + 6.0, (y0 + y1) / 2.0 + 14.0);
        let _ = writeln!(
            out,
            r#"  <text class="slope" data-index="{}" x="{mx:.4}" y="{my:.4}" font-family="sans-serif" font-size="13">k={}</text>"#,
            i + 1,
            rational_to_string(&k)
        );
    }

    out.push_str("</svg>\n");
    out
}
