//! Fixtures and independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's quadrature or intersection code: the
//! oracles are deliberately naive so that agreement means something.
#![allow(dead_code)]

pub mod props;

use curvexfer::{BezierCurve, BezierTriangle, Point, StandardNodes};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn close_pt(a: Point, b: Point, tol: f64) -> bool {
    a.distance(b) <= tol
}

// ---------------------------------------------------------------- fixtures

/// The straight quadratic `b0` and curved quadratic `b1` of the worked
/// intersection example.
pub fn worked_pair() -> (BezierTriangle, BezierTriangle) {
    let b0 = BezierTriangle::affine(2, [pt(0.0, 0.0), pt(8.0, 0.0), pt(0.0, 8.0)]);
    let b1 = BezierTriangle::new(
        2,
        vec![pt(-2.0, 4.0), pt(4.0, -4.0), pt(10.0, 4.0), pt(-1.0, 7.0), pt(5.0, 7.0), pt(0.0, 10.0)],
    )
    .unwrap();
    (b0, b1)
}

/// Quadratic element given by corners and the midpoint of its
/// hypotenuse; the two other edges are straight.
pub fn bowed(c0: Point, c1: Point, c2: Point, hyp_mid: Point) -> BezierTriangle {
    let nodes = vec![c0, c0.lerp(c1, 0.5), c1, c0.lerp(c2, 0.5), hyp_mid, c2];
    StandardNodes::new(2, nodes).unwrap().to_triangle().unwrap()
}

/// The pair of quadratic triangles whose intersection has four sides.
pub fn four_sided_pair() -> (BezierTriangle, BezierTriangle) {
    (
        bowed(pt(0.0, 0.0), pt(8.0, 0.0), pt(0.0, 8.0), pt(5.0, 5.0)),
        bowed(pt(1.0, 1.0), pt(-6.0, 2.0), pt(1.0, -7.0), pt(-3.5, -3.5)),
    )
}

/// The quadratic element with standard nodes (0,4),(2,4),(4,4),(2,6),(5,7),(4,8),
/// i.e. `b(s,t) = [4(st+s+t), 4(st+t+1)]`.
pub fn quadratic_example() -> BezierTriangle {
    let nodes = [(0.0, 4.0), (2.0, 4.0), (4.0, 4.0), (2.0, 6.0), (5.0, 7.0), (4.0, 8.0)].map(|(x, y)| pt(x, y));
    StandardNodes::new(2, nodes.to_vec()).unwrap().to_triangle().unwrap()
}

pub fn quadratic_example_map(s: f64, t: f64) -> Point {
    pt(4.0 * (s * t + s + t), 4.0 * (s * t + t + 1.0))
}

/// Random straight triangle, counter-clockwise, not too thin.
pub fn random_straight(r: &mut impl Rng, center: Point, size: f64) -> [Point; 3] {
    loop {
        let c: [Point; 3] =
            std::array::from_fn(|_| center + pt(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * size);
        let a = (c[1] - c[0]).cross(c[2] - c[0]);
        if a.abs() > 0.2 * size * size {
            return if a > 0.0 { c } else { [c[0], c[2], c[1]] };
        }
    }
}

/// Random valid quadratic triangle: a straight one with its edge
/// midpoints pushed by up to `bend` times the size.
pub fn random_quadratic(r: &mut impl Rng, center: Point, size: f64, bend: f64) -> BezierTriangle {
    loop {
        let c = random_straight(r, center, size);
        let mut off = || pt(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * (bend * size);
        let nodes = vec![c[0], c[0].lerp(c[1], 0.5) + off(), c[1], c[0].lerp(c[2], 0.5) + off(), c[1].lerp(c[2], 0.5) + off(), c[2]];
        if let Ok(t) = StandardNodes::new(2, nodes).unwrap().to_triangle() {
            if t.is_valid() {
                return t;
            }
        }
    }
}

pub fn random_curve(r: &mut impl Rng, degree: usize, center: Point, size: f64) -> BezierCurve {
    let pts = (0..=degree).map(|_| center + pt(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * size).collect();
    BezierCurve::new(pts).unwrap()
}

// ----------------------------------------------------------------- oracles

/// Bernstein evaluation straight from the definition.
pub fn bernstein_eval(points: &[Point], s: f64) -> Point {
    let n = points.len() - 1;
    let mut out = pt(0.0, 0.0);
    for (j, &p) in points.iter().enumerate() {
        out += p * (binomial(n, j) * s.powi(j as i32) * (1.0 - s).powi((n - j) as i32));
    }
    out
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn shoelace(poly: &[Point]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>()
}

/// Sutherland–Hodgman clipping of `subject` by the convex, counter-clockwise `clip`.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let inside = |p: Point| (b - a).cross(p - a) >= 0.0;
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let crossing = |p: Point, q: Point| {
                let (dp, dq) = ((b - a).cross(p - a), (b - a).cross(q - a));
                p + (q - p) * (dp / (dp - dq))
            };
            match (inside(p), inside(q)) {
                (true, true) => out.push(q),
                (true, false) => out.push(crossing(p, q)),
                (false, true) => {
                    out.push(crossing(p, q));
                    out.push(q);
                }
                (false, false) => {}
            }
        }
        if out.is_empty() {
            break;
        }
    }
    out
}

/// Whether `q` lies in the image of a valid triangle, by Newton on the
/// map from a grid of starting guesses. Independent of the library's
/// subdivision-based point location.
pub fn inside_triangle(tri: &BezierTriangle, q: Point) -> bool {
    let starts = [(1.0 / 3.0, 1.0 / 3.0), (0.1, 0.1), (0.8, 0.1), (0.1, 0.8), (0.45, 0.45), (0.45, 0.1), (0.1, 0.45)];
    for &(mut s, mut t) in &starts {
        for _ in 0..40 {
            let p = tri.eval(s, t);
            let h = 1e-7;
            let ps = (tri.eval(s + h, t) - tri.eval(s - h, t)) * (0.5 / h);
            let pt_ = (tri.eval(s, t + h) - tri.eval(s, t - h)) * (0.5 / h);
            let det = ps.cross(pt_);
            if det.abs() < 1e-300 {
                break;
            }
            let r = q - p;
            let ds = r.cross(pt_) / det;
            let dt = ps.cross(r) / det;
            s += ds;
            t += dt;
            if s.abs() + t.abs() > 10.0 {
                break;
            }
            if ds.abs() + dt.abs() < 1e-14 {
                break;
            }
        }
        if tri.eval(s, t).distance(q) < 1e-9 * tri.diameter() {
            return s >= 0.0 && t >= 0.0 && s + t <= 1.0;
        }
    }
    false
}

/// Monte Carlo estimate of `area(a ∩ b)` with its standard error. Samples are
/// uniform in a's reference triangle, weighted by a finite-difference |det Da|.
pub fn monte_carlo_overlap(a: &BezierTriangle, b: &BezierTriangle, samples: usize, seed: u64) -> (f64, f64) {
    use rayon::prelude::*;
    let bb = b.bounding_box();
    let chunks = 64;
    let per = samples / chunks;
    let (sum, sum_sq): (f64, f64) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng(seed.wrapping_mul(1_000_003).wrapping_add(c as u64));
            let mut acc = (0.0, 0.0);
            for _ in 0..per {
                let (s, t) = (r.gen_range(0.0..1.0), r.gen_range(0.0..1.0));
                let (s, t) = if s + t > 1.0 { (1.0 - s, 1.0 - t) } else { (s, t) };
                let q = a.eval(s, t);
                if bb.contains(q) && inside_triangle(b, q) {
                    let w = 0.5 * fd_jacobian_det(a, s, t).abs();
                    acc.0 += w;
                    acc.1 += w * w;
                }
            }
            acc
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    let n = (per * chunks) as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Curve intersections by brute force: sample both curves on an `n`-point
/// grid, take grid-local minima of the distance, polish by bisection-style
/// pattern search, keep those that reach zero.
pub fn grid_intersections(c0: &BezierCurve, c1: &BezierCurve, n: usize) -> Vec<(f64, f64)> {
    let a: Vec<Point> = (0..=n).map(|i| bernstein_eval(c0.control_points(), i as f64 / n as f64)).collect();
    let b: Vec<Point> = (0..=n).map(|j| bernstein_eval(c1.control_points(), j as f64 / n as f64)).collect();
    let scale = c0.diameter().max(c1.diameter()).max(1e-300);
    let d = |i: usize, j: usize| a[i].distance(b[j]);
    // The spacing between neighbouring samples bounds the distance at a crossing.
    let step = |v: &[Point], i: usize| {
        let lo = if i > 0 { v[i].distance(v[i - 1]) } else { 0.0 };
        let hi = if i < n { v[i].distance(v[i + 1]) } else { 0.0 };
        lo.max(hi)
    };
    let mut out: Vec<(f64, f64)> = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            let here = d(i, j);
            if here > 2.0 * (step(&a, i) + step(&b, j)) {
                continue;
            }
            let mut local_min = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii > n as i64 || jj > n as i64 {
                        continue;
                    }
                    let other = d(ii as usize, jj as usize);
                    if other < here || (other == here && (ii, jj) < (i as i64, j as i64)) {
                        local_min = false;
                        break 'nb;
                    }
                }
            }
            if !local_min {
                continue;
            }
            let (s, t, dist) = polish(c0, c1, i as f64 / n as f64, j as f64 / n as f64, 1.0 / n as f64);
            if dist <= 1e-9 * scale && !out.iter().any(|&(s2, t2)| (s - s2).abs() < 1e-6 && (t - t2).abs() < 1e-6) {
                out.push((s, t));
            }
        }
    }
    out
}

/// Pattern search on `|c0(s) - c1(t)|` over `[0,1]²`, halving the step
/// whenever no neighbour improves.
fn polish(c0: &BezierCurve, c1: &BezierCurve, mut s: f64, mut t: f64, mut h: f64) -> (f64, f64, f64) {
    let f = |s: f64, t: f64| bernstein_eval(c0.control_points(), s).distance(bernstein_eval(c1.control_points(), t));
    let mut best = f(s, t);
    while h > 1e-15 {
        let mut improved = false;
        for (ds, dt) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
            let (s2, t2) = ((s + ds * h).clamp(0.0, 1.0), (t + dt * h).clamp(0.0, 1.0));
            let v = f(s2, t2);
            if v < best {
                best = v;
                s = s2;
                t = t2;
                improved = true;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (s, t, best)
}

/// Adaptive Simpson on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `∫_U g(s, t) ds dt` over the unit triangle by nested adaptive Simpson.
pub fn adaptive_unit_triangle(g: &dyn Fn(f64, f64) -> f64, tol: f64) -> f64 {
    adaptive_simpson(&|s| adaptive_simpson(&|t| g(s, t), 0.0, 1.0 - s, tol), 0.0, 1.0, tol)
}

/// `∫_{b(U)} F` through the element map, with a finite-difference Jacobian.
pub fn adaptive_over_element(tri: &BezierTriangle, f: &dyn Fn(Point) -> f64, tol: f64) -> f64 {
    adaptive_unit_triangle(&|s, t| f(tri.eval(s, t)) * fd_jacobian_det(tri, s, t), tol)
}

/// Jacobian determinant by centred differences. Exact up to round-off for
/// quadratic maps because the second difference of a quadratic vanishes.
pub fn fd_jacobian_det(tri: &BezierTriangle, s: f64, t: f64) -> f64 {
    let h = 1e-4;
    let ds = (tri.eval(s + h, t) - tri.eval(s - h, t)) * (0.5 / h);
    let dt = (tri.eval(s, t + h) - tri.eval(s, t - h)) * (0.5 / h);
    ds.cross(dt)
}

/// `∫ F` over the region bounded by four curves via the bilinearly blended
/// (Coons) patch, using the signed Jacobian. Curves run counter-clockwise:
/// `c[0]` along the bottom, `c[1]` up the right, `c[2]` along the top
/// backwards, `c[3]` down the left.
pub fn coons_integral(c: &[BezierCurve; 4], f: &dyn Fn(Point) -> f64, tol: f64) -> f64 {
    let patch = |u: f64, v: f64| -> Point {
        let bottom = c[0].eval(u);
        let top = c[2].eval(1.0 - u);
        let left = c[3].eval(1.0 - v);
        let right = c[1].eval(v);
        let (p00, p10, p11, p01) = (c[0].start(), c[0].end(), c[2].start(), c[2].end());
        let ruled_v = bottom * (1.0 - v) + top * v;
        let ruled_u = left * (1.0 - u) + right * u;
        let bilinear = p00 * ((1.0 - u) * (1.0 - v)) + p10 * (u * (1.0 - v)) + p11 * (u * v) + p01 * ((1.0 - u) * v);
        ruled_v + ruled_u - bilinear
    };
    let h = 1e-5;
    let g = |u: f64, v: f64| {
        let du = (patch(u + h, v) - patch(u - h, v)) * (0.5 / h);
        let dv = (patch(u, v + h) - patch(u, v - h)) * (0.5 / h);
        f(patch(u, v)) * du.cross(dv)
    };
    adaptive_simpson(&|u| adaptive_simpson(&|v| g(u, v), 0.0, 1.0, tol), 0.0, 1.0, tol)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let l: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = l.len() as f64;
    let mx = l.iter().map(|p| p.0).sum::<f64>() / n;
    let my = l.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = l.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = l.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
