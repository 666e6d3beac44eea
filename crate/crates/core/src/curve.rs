//! Planar Bézier curves.
//!
//! All evaluation goes through the de Casteljau recurrence, so every
//! intermediate value is a convex combination of control points when the
//! parameter lies in `[0, 1]`.

use crate::error::{Error, Result};
use crate::point::{BoundingBox, Point};

/// Highest supported polynomial degree for curves and triangles.
pub const MAX_DEGREE: usize = 10;

/// A degree-`n` Bézier curve with `n + 1` control points.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierCurve {
    control_points: Vec<Point>,
}

impl BezierCurve {
    pub fn new(control_points: Vec<Point>) -> Result<Self> {
        if control_points.is_empty() {
            return Err(Error::ControlPointCount { expected: 1, found: 0 });
        }
        let degree = control_points.len() - 1;
        if degree > MAX_DEGREE {
            return Err(Error::DegreeTooHigh { degree, max: MAX_DEGREE });
        }
        Ok(Self { control_points })
    }

    /// Straight segment from `a` to `b` with linear parameterization.
    pub fn line(a: Point, b: Point) -> Self {
        Self { control_points: vec![a, b] }
    }

    pub(crate) fn from_points_unchecked(control_points: Vec<Point>) -> Self {
        debug_assert!(!control_points.is_empty() && control_points.len() <= MAX_DEGREE + 1);
        Self { control_points }
    }

    pub fn degree(&self) -> usize {
        self.control_points.len() - 1
    }

    pub fn control_points(&self) -> &[Point] {
        &self.control_points
    }

    pub fn start(&self) -> Point {
        self.control_points[0]
    }

    pub fn end(&self) -> Point {
        *self.control_points.last().unwrap()
    }

    pub fn eval(&self, s: f64) -> Point {
        de_casteljau(&self.control_points, s)
    }

    /// Control points of the hodograph, `n (p_{j+1} - p_j)`.
    pub fn hodograph_points(&self) -> Vec<Point> {
        let n = self.degree() as f64;
        self.control_points.windows(2).map(|w| (w[1] - w[0]) * n).collect()
    }

    pub fn derivative(&self, s: f64) -> Point {
        if self.degree() == 0 {
            return Point::default();
        }
        de_casteljau(&self.hodograph_points(), s)
    }

    pub fn second_derivative(&self, s: f64) -> Point {
        if self.degree() < 2 {
            return Point::default();
        }
        let first = self.hodograph_points();
        let m = (first.len() - 1) as f64;
        let second: Vec<Point> = first.windows(2).map(|w| (w[1] - w[0]) * m).collect();
        de_casteljau(&second, s)
    }

    /// Split at `s = 1/2` into the left and right halves.
    pub fn subdivide(&self) -> (BezierCurve, BezierCurve) {
        self.split_at(0.5)
    }

    pub fn split_at(&self, s: f64) -> (BezierCurve, BezierCurve) {
        let n = self.control_points.len();
        let mut work = self.control_points.clone();
        let mut left = Vec::with_capacity(n);
        let mut right = Vec::with_capacity(n);
        left.push(work[0]);
        right.push(work[n - 1]);
        for level in 1..n {
            for i in 0..n - level {
                work[i] = work[i].lerp(work[i + 1], s);
            }
            left.push(work[0]);
            right.push(work[n - 1 - level]);
        }
        right.reverse();
        (Self { control_points: left }, Self { control_points: right })
    }

    /// The curve `r -> c(a + r (b - a))`, restricted to `[a, b]`.
    pub fn specialize(&self, a: f64, b: f64) -> Result<BezierCurve> {
        if !(a < b) {
            return Err(Error::InvalidInterval { start: a, end: b });
        }
        Ok(self.specialize_unchecked(a, b))
    }

    /// Blossom-based reparameterization; also accepts `a > b` (reversal).
    pub(crate) fn specialize_unchecked(&self, a: f64, b: f64) -> BezierCurve {
        let n = self.degree();
        let mut params = Vec::with_capacity(n);
        let points = (0..=n)
            .map(|k| {
                params.clear();
                params.extend(std::iter::repeat(a).take(n - k));
                params.extend(std::iter::repeat(b).take(k));
                blossom(&self.control_points, &params)
            })
            .collect();
        Self { control_points: points }
    }

    pub fn reversed(&self) -> BezierCurve {
        let mut pts = self.control_points.clone();
        pts.reverse();
        Self { control_points: pts }
    }

    /// Same curve written with one more control point.
    pub fn elevate(&self) -> BezierCurve {
        let n = self.degree();
        let p = &self.control_points;
        let mut out = Vec::with_capacity(n + 2);
        out.push(p[0]);
        for i in 1..=n {
            let a = i as f64 / (n + 1) as f64;
            out.push(p[i - 1] * a + p[i] * (1.0 - a));
        }
        out.push(p[n]);
        Self { control_points: out }
    }

    pub fn elevate_to(&self, degree: usize) -> BezierCurve {
        let mut c = self.clone();
        while c.degree() < degree {
            c = c.elevate();
        }
        c
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox::from_points(&self.control_points)
    }

    pub fn diameter(&self) -> f64 {
        crate::point::diameter(&self.control_points)
    }

    /// Largest distance between an interior control point and the chord,
    /// divided by the chord length. Infinite for a zero-length chord with
    /// spread-out control points.
    pub fn relative_flatness(&self) -> f64 {
        let a = self.start();
        let b = self.end();
        let chord = b - a;
        let len = chord.norm();
        let interior = &self.control_points[1..self.control_points.len().saturating_sub(1).max(1)];
        if len == 0.0 {
            let spread = interior.iter().map(|p| p.distance(a)).fold(0.0, f64::max);
            return if spread == 0.0 { 0.0 } else { f64::INFINITY };
        }
        interior
            .iter()
            .map(|p| (*p - a).cross(chord).abs() / len)
            .fold(0.0, f64::max)
            / len
    }

    /// Parameter in `[0, 1]` of the curve point nearest to `q`, and its distance.
    pub fn closest_parameter(&self, q: Point) -> (f64, f64) {
        let samples = 8 * (self.degree() + 1);
        let mut best = (0.0, f64::INFINITY);
        for i in 0..=samples {
            let t = i as f64 / samples as f64;
            let d = self.eval(t).distance(q);
            if d < best.1 {
                best = (t, d);
            }
        }
        let mut t = best.0;
        for _ in 0..30 {
            let r = self.eval(t) - q;
            let d1 = self.derivative(t);
            let g = r.dot(d1);
            let dg = d1.dot(d1) + r.dot(self.second_derivative(t));
            if dg <= 0.0 {
                break;
            }
            let next = (t - g / dg).clamp(0.0, 1.0);
            let step = (next - t).abs();
            t = next;
            if step < 1e-15 {
                break;
            }
        }
        let d = self.eval(t).distance(q);
        if d < best.1 { (t, d) } else { best }
    }

    /// Sampled polyline through `n + 1` equally spaced parameters.
    pub fn polyline(&self, n: usize) -> Vec<Point> {
        (0..=n).map(|i| self.eval(i as f64 / n as f64)).collect()
    }
}

/// Evaluate the Bernstein combination of `points` at `s`.
pub(crate) fn de_casteljau(points: &[Point], s: f64) -> Point {
    match points.len() {
        1 => points[0],
        2 => points[0].lerp(points[1], s),
        _ => {
            let mut work: smallbuf::Buf = smallbuf::Buf::from_slice(points);
            let w = work.as_mut_slice();
            let n = w.len();
            for level in 1..n {
                for i in 0..n - level {
                    w[i] = w[i].lerp(w[i + 1], s);
                }
            }
            w[0]
        }
    }
}

/// Multi-affine blossom: one de Casteljau step per parameter.
pub(crate) fn blossom(points: &[Point], params: &[f64]) -> Point {
    debug_assert_eq!(points.len(), params.len() + 1);
    let mut work = smallbuf::Buf::from_slice(points);
    let w = work.as_mut_slice();
    let n = w.len();
    for (level, &u) in params.iter().enumerate() {
        for i in 0..n - level - 1 {
            w[i] = w[i].lerp(w[i + 1], u);
        }
    }
    w[0]
}

/// Sum of the degree-`n` Bernstein basis at `s`.
pub fn bernstein_values(n: usize, s: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    out[0] = 1.0;
    // Triangle recursion keeps every entry a convex combination.
    for k in 1..=n {
        let mut prev = 0.0;
        for j in 0..=k {
            let cur = out[j];
            out[j] = (1.0 - s) * cur + s * prev;
            prev = cur;
        }
    }
    out
}

mod smallbuf {
    use crate::point::Point;

    const CAP: usize = super::MAX_DEGREE + 2;

    pub(crate) enum Buf {
        Stack([Point; CAP], usize),
        Heap(Vec<Point>),
    }

    impl Buf {
        pub(crate) fn from_slice(src: &[Point]) -> Self {
            if src.len() <= CAP {
                let mut arr = [Point::default(); CAP];
                arr[..src.len()].copy_from_slice(src);
                Buf::Stack(arr, src.len())
            } else {
                Buf::Heap(src.to_vec())
            }
        }

        pub(crate) fn as_mut_slice(&mut self) -> &mut [Point] {
            match self {
                Buf::Stack(arr, n) => &mut arr[..*n],
                Buf::Heap(v) => v.as_mut_slice(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e3() -> BezierCurve {
        BezierCurve::new(vec![Point::new(-2.0, 4.0), Point::new(4.0, -4.0), Point::new(10.0, 4.0)])
            .unwrap()
    }

    fn close(a: Point, b: Point, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn linear_midpoint() {
        let c = BezierCurve::line(Point::new(0.0, 0.0), Point::new(8.0, 0.0));
        assert_eq!(c.eval(0.5), Point::new(4.0, 0.0));
        assert_eq!(c.derivative(0.3), Point::new(8.0, 0.0));
    }

    #[test]
    fn worked_example_points() {
        let c = e3();
        assert!(close(c.eval(1.0 / 6.0), Point::new(0.0, 16.0 / 9.0), 1e-14));
        assert!(close(c.eval(0.75), Point::new(7.0, 1.0), 1e-14));
    }

    #[test]
    fn worked_example_cross_products() {
        let e0 = BezierCurve::line(Point::new(0.0, 0.0), Point::new(8.0, 0.0));
        let e1 = BezierCurve::line(Point::new(8.0, 0.0), Point::new(0.0, 8.0));
        let e2 = BezierCurve::line(Point::new(0.0, 8.0), Point::new(0.0, 0.0));
        let c = e3();
        let i1 = e2.derivative(7.0 / 9.0).cross(c.derivative(1.0 / 6.0));
        assert!((i1 - 96.0).abs() < 1e-12);
        assert_eq!(e0.derivative(0.5).cross(c.derivative(0.5)), 0.0);
        let i3 = e1.derivative(1.0 / 8.0).cross(c.derivative(0.75));
        assert!((i3 + 160.0).abs() < 1e-12);
    }

    #[test]
    fn degree_zero_derivative() {
        let c = BezierCurve::new(vec![Point::new(1.0, 2.0)]).unwrap();
        assert_eq!(c.derivative(0.5), Point::default());
    }

    #[test]
    fn rejects_high_degree_and_empty() {
        assert!(matches!(BezierCurve::new(vec![]), Err(Error::ControlPointCount { .. })));
        let pts = vec![Point::default(); MAX_DEGREE + 2];
        assert!(matches!(BezierCurve::new(pts), Err(Error::DegreeTooHigh { .. })));
    }

    #[test]
    fn subdivide_line() {
        let c = BezierCurve::line(Point::new(0.0, 0.0), Point::new(8.0, 0.0));
        let (l, r) = c.subdivide();
        assert_eq!(l.control_points(), &[Point::new(0.0, 0.0), Point::new(4.0, 0.0)]);
        assert_eq!(r.control_points(), &[Point::new(4.0, 0.0), Point::new(8.0, 0.0)]);
    }

    #[test]
    fn subdivide_matches_direct_evaluation() {
        let c = e3();
        let (l, r) = c.subdivide();
        assert_eq!(l.eval(1.0), r.eval(0.0));
        assert!(close(l.eval(1.0), c.eval(0.5), 1e-15));
        for i in 0..20 {
            let s = i as f64 / 19.0;
            assert!(close(l.eval(s), c.eval(s / 2.0), 1e-14));
            assert!(close(r.eval(s), c.eval(0.5 + s / 2.0), 1e-14));
        }
    }

    #[test]
    fn specialize_worked_example() {
        let q = e3().specialize(1.0 / 6.0, 0.75).unwrap();
        let want = [Point::new(0.0, 16.0 / 9.0), Point::new(21.0 / 6.0, -8.0 / 6.0), Point::new(7.0, 1.0)];
        for (a, b) in q.control_points().iter().zip(want) {
            assert!(close(*a, b, 1e-14), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn specialize_identity_and_halves() {
        let c = e3();
        assert_eq!(c.specialize(0.0, 1.0).unwrap(), c);
        let (l, _) = c.subdivide();
        let s = c.specialize(0.0, 0.5).unwrap();
        for (a, b) in s.control_points().iter().zip(l.control_points()) {
            assert!(close(*a, *b, 1e-14));
        }
    }

    #[test]
    fn specialize_rejects_empty_interval() {
        assert!(matches!(e3().specialize(0.5, 0.5), Err(Error::InvalidInterval { .. })));
        assert!(matches!(e3().specialize(0.7, 0.2), Err(Error::InvalidInterval { .. })));
    }

    #[test]
    fn bounding_boxes() {
        let c = BezierCurve::line(Point::new(0.0, 0.0), Point::new(8.0, 0.0));
        let bb = c.bounding_box();
        assert_eq!((bb.min, bb.max), (Point::new(0.0, 0.0), Point::new(8.0, 0.0)));
        let bb = e3().bounding_box();
        assert_eq!((bb.min, bb.max), (Point::new(-2.0, -4.0), Point::new(10.0, 4.0)));
    }

    #[test]
    fn elevation_preserves_curve() {
        let c = e3();
        let e = c.elevate_to(5);
        assert_eq!(e.degree(), 5);
        for i in 0..=10 {
            let s = i as f64 / 10.0;
            assert!(close(c.eval(s), e.eval(s), 1e-13));
        }
    }

    #[test]
    fn bernstein_partition_of_unity() {
        for n in 0..=MAX_DEGREE {
            for i in 0..=50 {
                let s = i as f64 / 50.0;
                let sum: f64 = bernstein_values(n, s).iter().sum();
                assert!((sum - 1.0).abs() <= 4.0 * f64::EPSILON, "n={n} s={s} sum={sum}");
            }
        }
    }
}
