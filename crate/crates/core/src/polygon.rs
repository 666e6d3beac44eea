//! Curved polygons and their exact integration by Green's theorem.
//!
//! For a polynomial `F` of degree `d`, let `H(x, y) = ∫_m^x F(ξ, y) dξ` and
//! `V(x, y) = ∫_n^y F(x, η) dη`. Then
//!
//! ```text
//! 2 ∫_P F dV = ∮_∂P H dy - V dx,
//! ```
//!
//! and along a degree-`q` Bézier segment the integrand of the line integral
//! is a polynomial in the curve parameter of degree at most
//! `q (d + 1) + q - 1`. Both the inner antiderivatives and the outer line
//! integrals are evaluated by Gauss–Legendre rules of sufficient order, so
//! the result is exact up to round-off.

use std::fmt::Write as _;

use crate::curve::BezierCurve;
use crate::error::{Error, Result};
use crate::net::{self, net_index};
use crate::point::{BoundingBox, Point};
use crate::poly::BivariatePolynomial;
use crate::quadrature::{GaussLegendre, TriangleRule};
use crate::triangle::BezierTriangle;

/// Closure tolerance for consecutive segment endpoints, relative to the
/// polygon's size (with an absolute floor of one unit).
pub const CLOSURE_TOL: f64 = 1e-10;

/// A scalar function with a known polynomial degree.
pub trait Integrand {
    fn degree(&self) -> usize;
    fn eval(&self, p: Point) -> f64;
}

impl Integrand for BivariatePolynomial {
    fn degree(&self) -> usize {
        BivariatePolynomial::degree(self)
    }
    fn eval(&self, p: Point) -> f64 {
        BivariatePolynomial::eval(self, p)
    }
}

/// A closure paired with the polynomial degree used to pick quadrature
/// orders. Exactness only holds when the closure really is a polynomial of
/// at most that degree.
pub struct WithDegree<F>(pub usize, pub F);

impl<F: Fn(Point) -> f64> Integrand for WithDegree<F> {
    fn degree(&self) -> usize {
        self.0
    }
    fn eval(&self, p: Point) -> f64 {
        (self.1)(p)
    }
}

/// Which triangle edge a polygon segment was cut from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentOrigin {
    /// 0 for the first triangle of the pair, 1 for the second.
    pub triangle: usize,
    pub edge: usize,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone)]
pub struct CurvedPolygon {
    segments: Vec<BezierCurve>,
    origins: Vec<Option<SegmentOrigin>>,
    bbox: BoundingBox,
}

impl CurvedPolygon {
    /// A closed loop of curves, each starting where the previous one ends.
    pub fn new(segments: Vec<BezierCurve>) -> Result<Self> {
        let origins = vec![None; segments.len()];
        Self::with_origins(segments, origins)
    }

    pub fn with_origins(segments: Vec<BezierCurve>, origins: Vec<Option<SegmentOrigin>>) -> Result<Self> {
        assert_eq!(segments.len(), origins.len());
        if segments.is_empty() {
            return Err(Error::OpenBoundary { segment: 0, gap: f64::INFINITY });
        }
        let bbox = segments
            .iter()
            .map(|s| s.bounding_box())
            .reduce(|a, b| a.union(&b))
            .expect("non-empty");
        let tol = CLOSURE_TOL * bbox.diagonal().max(1.0);
        for i in 0..segments.len() {
            let gap = segments[i].end().distance(segments[(i + 1) % segments.len()].start());
            if gap > tol {
                return Err(Error::OpenBoundary { segment: i, gap });
            }
        }
        Ok(Self { segments, origins, bbox })
    }

    /// The boundary of a Bézier triangle as a three-segment polygon.
    pub fn from_triangle(tri: &BezierTriangle) -> Self {
        let segments: Vec<BezierCurve> = tri.edges().into();
        let bbox = tri.bounding_box();
        Self { segments, origins: vec![None; 3], bbox }
    }

    pub fn segments(&self) -> &[BezierCurve] {
        &self.segments
    }

    pub fn origins(&self) -> &[Option<SegmentOrigin>] {
        &self.origins
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.bbox
    }

    /// Segment start points, in boundary order.
    pub fn vertices(&self) -> Vec<Point> {
        self.segments.iter().map(|s| s.start()).collect()
    }

    /// Signed area (positive for counterclockwise boundaries).
    pub fn area(&self) -> f64 {
        self.integrate(&WithDegree(0, |_| 1.0))
    }

    pub fn integrate(&self, f: &impl Integrand) -> f64 {
        let mut out = [0.0];
        self.integrate_with(f.degree(), &mut out, |p, v| v[0] = f.eval(p));
        out[0]
    }

    /// Integrate a vector-valued polynomial of degree `degree`; `f` writes
    /// its values at a point into the provided slice, which has the length
    /// of `out`.
    pub fn integrate_with(&self, degree: usize, out: &mut [f64], f: impl Fn(Point, &mut [f64])) {
        let n = out.len();
        out.fill(0.0);
        let mut vals = vec![0.0; n];
        let (mx, my) = self.antiderivative_origins();
        let inner = GaussLegendre::get((degree + 2).div_ceil(2));
        for seg in &self.segments {
            let q = seg.degree();
            let outer_nodes = (q * (degree + 1) + q).div_ceil(2).max(1);
            let outer = GaussLegendre::get(outer_nodes);
            let hodo = seg.hodograph_points();
            for (r, wr) in outer.unit_interval() {
                let pt = seg.eval(r);
                let d = if q == 0 { Point::default() } else { crate::curve::de_casteljau(&hodo, r) };
                let hx = 0.5 * (pt.x - mx);
                let hy = 0.5 * (pt.y - my);
                for (&xi, &wi) in inner.nodes.iter().zip(&inner.weights) {
                    let x = mx + hx * (xi + 1.0);
                    f(Point::new(x, pt.y), &mut vals);
                    let c = wr * wi * hx * d.y;
                    for (o, v) in out.iter_mut().zip(&vals) {
                        *o += c * v;
                    }
                    let y = my + hy * (xi + 1.0);
                    f(Point::new(pt.x, y), &mut vals);
                    let c = wr * wi * hy * d.x;
                    for (o, v) in out.iter_mut().zip(&vals) {
                        *o -= c * v;
                    }
                }
            }
        }
        for o in out.iter_mut() {
            *o *= 0.5;
        }
    }

    /// Lower limits `(m, n)` of the antiderivatives: the smallest `x` and
    /// `y` among all segment control points.
    pub fn antiderivative_origins(&self) -> (f64, f64) {
        (self.bbox.min.x, self.bbox.min.y)
    }

    /// Green's-theorem integral with caller-chosen lower limits.
    pub fn integrate_with_origins(&self, f: &impl Integrand, mx: f64, my: f64) -> f64 {
        let d = f.degree();
        let mut total = 0.0;
        for seg in &self.segments {
            let q = seg.degree();
            let outer = GaussLegendre::get((q * (d + 1) + q).div_ceil(2).max(1));
            for (r, wr) in outer.unit_interval() {
                let pt = seg.eval(r);
                let dp = seg.derivative(r);
                let h = eval_antiderivative_h(f, mx, pt.x, pt.y);
                let v = eval_antiderivative_v(f, my, pt.x, pt.y);
                total += wr * (h * dp.y - v * dp.x);
            }
        }
        0.5 * total
    }

    /// Independent evaluation of `∫_P F` through a fan of Bézier triangles
    /// from the first vertex, using `∫_U det(Dφ) F∘φ` with the signed
    /// determinant so that inverted triangles cancel correctly.
    pub fn tessellation_crosscheck(&self, f: &impl Integrand) -> f64 {
        let n = self.segments.len();
        assert!(n >= 3, "tessellation needs at least three segments");
        let p = self.segments.iter().map(|s| s.degree()).max().unwrap_or(1).max(1);
        let v0 = self.segments[0].start();
        let mut total = 0.0;
        for j in 1..n - 1 {
            let first = if j == 1 {
                self.segments[0].clone()
            } else {
                BezierCurve::line(v0, self.segments[j].start())
            };
            let last = if j == n - 2 {
                self.segments[n - 1].clone()
            } else {
                BezierCurve::line(self.segments[j].end(), v0)
            };
            let tri = triangle_from_edges([first, self.segments[j].clone(), last], p);
            let rule = TriangleRule::for_degree(2 * (p - 1) + f.degree() * p);
            total += rule.integrate(|s, t| tri.jacobian_det(s, t) * f.eval(tri.eval(s, t)));
        }
        total
    }

    /// Shoelace area of the polygon through `per_segment + 1` samples per segment.
    pub fn polygonal_area(&self, per_segment: usize) -> f64 {
        let pts: Vec<Point> = self
            .segments
            .iter()
            .flat_map(|s| (0..per_segment).map(move |i| s.eval(i as f64 / per_segment as f64)))
            .collect();
        let m = pts.len();
        0.5 * (0..m).map(|i| pts[i].cross(pts[(i + 1) % m])).sum::<f64>()
    }

    /// Largest gap between the end of a segment and the start of the next.
    pub fn closure_gap(&self) -> f64 {
        let n = self.segments.len();
        (0..n)
            .map(|i| self.segments[i].end().distance(self.segments[(i + 1) % n].start()))
            .fold(0.0, f64::max)
    }

    /// SVG path data; segments of degree above three are approximated by
    /// piecewise cubic Hermite interpolation.
    pub fn to_svg_path(&self) -> String {
        let mut out = String::new();
        let start = self.segments[0].start();
        let _ = write!(out, "M {} {}", start.x, start.y);
        for seg in &self.segments {
            match seg.degree() {
                0 | 1 => {
                    let e = seg.end();
                    let _ = write!(out, " L {} {}", e.x, e.y);
                }
                2 | 3 => {
                    let c = seg.elevate_to(3);
                    let [_, a, b, e] = [c.control_points()[0], c.control_points()[1], c.control_points()[2], c.control_points()[3]];
                    let _ = write!(out, " C {} {} {} {} {} {}", a.x, a.y, b.x, b.y, e.x, e.y);
                }
                _ => {
                    let pieces = 8;
                    for k in 0..pieces {
                        let (r0, r1) = (k as f64 / pieces as f64, (k + 1) as f64 / pieces as f64);
                        let h = (r1 - r0) / 3.0;
                        let a = seg.eval(r0) + seg.derivative(r0) * h;
                        let b = seg.eval(r1) - seg.derivative(r1) * h;
                        let e = seg.eval(r1);
                        let _ = write!(out, " C {} {} {} {} {} {}", a.x, a.y, b.x, b.y, e.x, e.y);
                    }
                }
            }
        }
        out.push_str(" Z");
        out
    }
}

/// `H(α, β) = ∫_m^α F(x, β) dx` by Gauss–Legendre with `⌈(d + 2)/2⌉` nodes.
pub fn eval_antiderivative_h(f: &impl Integrand, m: f64, alpha: f64, beta: f64) -> f64 {
    let rule = GaussLegendre::get((f.degree() + 2).div_ceil(2));
    rule.integrate(m, alpha, |x| f.eval(Point::new(x, beta)))
}

/// `V(α, β) = ∫_n^β F(α, y) dy`.
pub fn eval_antiderivative_v(f: &impl Integrand, n: f64, alpha: f64, beta: f64) -> f64 {
    let rule = GaussLegendre::get((f.degree() + 2).div_ceil(2));
    rule.integrate(n, beta, |y| f.eval(Point::new(alpha, y)))
}

/// Degree-`p` Bézier triangle whose boundary is the given edge loop
/// (bottom, hypotenuse, left); interior control points are affine in the
/// corners, which leaves the signed integral unchanged.
pub(crate) fn triangle_from_edges(edges: [BezierCurve; 3], p: usize) -> BezierTriangle {
    let e: Vec<BezierCurve> = edges.iter().map(|c| c.elevate_to(p)).collect();
    let corners = [e[0].start(), e[1].start(), e[2].start()];
    let mut netv = vec![Point::default(); net::net_len(p)];
    for (i, j, k) in net::multi_indices(p) {
        netv[net_index(j, k, p)] = (corners[0] * i as f64 + corners[1] * j as f64 + corners[2] * k as f64) * (1.0 / p as f64);
    }
    for m in 0..=p {
        netv[net_index(m, 0, p)] = e[0].control_points()[m];
        netv[net_index(p - m, m, p)] = e[1].control_points()[m];
        netv[net_index(0, p - m, p)] = e[2].control_points()[m];
    }
    BezierTriangle::new(p, netv).expect("degree is at least one")
}
