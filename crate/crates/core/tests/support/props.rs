//! Proptest strategies for geometric inputs.

use curvexfer::{BezierCurve, BezierTriangle, Point, StandardNodes};
use proptest::prelude::*;

pub const CASES: u32 = 256;

pub fn config() -> ProptestConfig {
    ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() }
}

pub fn point(range: f64) -> impl Strategy<Value = Point> {
    (-range..range, -range..range).prop_map(|(x, y)| Point::new(x, y))
}

pub fn curve(degrees: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = BezierCurve> {
    degrees
        .prop_flat_map(|n| prop::collection::vec(point(4.0), n + 1))
        .prop_map(|pts| BezierCurve::new(pts).unwrap())
}

/// Parameter pair in the closed unit triangle.
pub fn unit_param() -> impl Strategy<Value = (f64, f64)> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(a, b)| if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) })
}

/// Straight triangle with area bounded away from zero, counter-clockwise.
pub fn straight_corners(range: f64) -> impl Strategy<Value = [Point; 3]> {
    (point(range), point(range), point(range))
        .prop_filter_map("degenerate", move |(a, b, c)| {
            let area = (b - a).cross(c - a);
            if area.abs() < 0.1 * range * range {
                None
            } else if area > 0.0 {
                Some([a, b, c])
            } else {
                Some([a, c, b])
            }
        })
}

/// Valid quadratic triangle: straight corners with perturbed edge midpoints.
pub fn quadratic_triangle(range: f64) -> impl Strategy<Value = BezierTriangle> {
    (straight_corners(range), prop::collection::vec(point(0.15 * range), 3)).prop_filter_map("invalid", |(c, off)| {
        let nodes = vec![
            c[0],
            c[0].lerp(c[1], 0.5) + off[0],
            c[1],
            c[0].lerp(c[2], 0.5) + off[1],
            c[1].lerp(c[2], 0.5) + off[2],
            c[2],
        ];
        let t = StandardNodes::new(2, nodes).ok()?.to_triangle().ok()?;
        t.is_valid().then_some(t)
    })
}

/// Valid triangle of degree 1 to 3.
pub fn triangle(range: f64) -> impl Strategy<Value = BezierTriangle> {
    (1usize..=3, straight_corners(range), prop::collection::vec(point(0.1 * range), 10)).prop_filter_map(
        "invalid",
        |(p, c, off)| {
            let base = StandardNodes::affine(p, c);
            let lattice = curvexfer::net::lattice(p);
            let nodes: Vec<Point> = base
                .nodes()
                .iter()
                .zip(&lattice)
                .zip(&off)
                .map(|((&n, &(s, t)), &o)| {
                    // Corners stay put so the triangle keeps its shape.
                    let corner = (s == 0.0 && t == 0.0) || s == 1.0 || t == 1.0;
                    if corner { n } else { n + o }
                })
                .collect();
            let t = StandardNodes::new(p, nodes).ok()?.to_triangle().ok()?;
            t.is_valid().then_some(t)
        },
    )
}
