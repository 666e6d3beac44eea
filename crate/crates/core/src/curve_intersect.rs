//! Intersection of two planar Bézier curves.
//!
//! Candidate pairs of sub-curves are produced by repeated midpoint
//! subdivision. A pair is discarded as soon as either its bounding boxes or
//! its fat lines are disjoint. Once both pieces are flat, the intersection
//! of their chords seeds Newton's method on `F(s, t) = b0(s) - b1(t)` over
//! the original parameterizations.

use crate::curve::BezierCurve;
use crate::error::{Error, Result};
use crate::point::Point;

pub use crate::point::boxes_overlap;

/// Relative flatness below which a piece is replaced by its chord.
pub const FLATNESS_TOL: f64 = 1e-9;
/// Deepest subdivision level before a pair is linearized regardless.
pub const MAX_DEPTH: usize = 40;
/// Maximum live candidate pairs; more indicates a shared curve segment.
pub const CANDIDATE_BUDGET: usize = 4096;
/// Parameter distance under which two roots are the same root.
pub const DEDUP_TOL: f64 = 1e-8;
/// Looser merge radius for tangent roots, which Newton resolves only to about `sqrt(eps)`.
pub const TANGENT_DEDUP_TOL: f64 = 1e-6;
/// Parameters this close to 0 or 1 snap to the endpoint.
pub const ENDPOINT_SNAP: f64 = 1e-8;
/// `|b0' x b1'| <= TANGENT_TOL |b0'| |b1'|` marks a tangency.
pub const TANGENT_TOL: f64 = 1e-10;
/// Accepted residual `|b0(s) - b1(t)|`, relative to the larger curve diameter.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Rejection margin, relative to the curve scale. Kept near round-off so
/// that tangential contacts do not leave a wide band of surviving pieces.
const REJECT_MARGIN: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 20;
const NEWTON_STEP_TOL: f64 = 1e-13;
/// The Jacobian counts as singular once the sine of the angle between the
/// two tangents drops below this; beyond that condition number plain Newton
/// steps are dominated by round-off in the near-tangent direction.
const NEWTON_SINGULAR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveIntersection {
    pub s: f64,
    pub t: f64,
    pub point: Point,
    /// `b0'(s) x b1'(t)`.
    pub transversality: f64,
    pub tangent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome {
    pub s: f64,
    pub t: f64,
    pub iterations: usize,
    pub residual: f64,
    /// The last update was below the step tolerance.
    pub converged: bool,
    /// A near-singular Jacobian forced at least one damped step.
    pub damped: bool,
}

/// Newton's method for `b0(s) = b1(t)` from `(s0, t0)`.
///
/// When the Jacobian `[b0'(s), -b1'(t)]` is numerically singular — the
/// tangent case — a Levenberg–Marquardt step is taken instead.
pub fn newton_refine(c0: &BezierCurve, c1: &BezierCurve, s0: f64, t0: f64) -> NewtonOutcome {
    let (mut s, mut t) = (s0, t0);
    let mut damped = false;
    let mut converged = false;
    let mut iterations = 0;
    let mut f = c0.eval(s) - c1.eval(t);
    while iterations < NEWTON_MAX_ITER {
        let d0 = c0.derivative(s);
        let d1 = c1.derivative(t);
        // J = [d0 | -d1]
        let det = -d0.cross(d1);
        let scale = d0.norm() * d1.norm();
        let (ds, dt) = if scale > 0.0 && det.abs() > NEWTON_SINGULAR_TOL * scale {
            // J^{-1} F by Cramer's rule.
            let ds = (-f.x * d1.y + d1.x * f.y) / det;
            let dt = (d0.x * f.y - d0.y * f.x) / det;
            (ds, dt)
        } else {
            damped = true;
            // (J^T J + λ I) Δ = J^T F
            let a = d0.dot(d0);
            let b = -d0.dot(d1);
            let c = d1.dot(d1);
            let lambda = 1e-8 * (a + c).max(f64::MIN_POSITIVE);
            let r0 = d0.dot(f);
            let r1 = -d1.dot(f);
            let (a, c) = (a + lambda, c + lambda);
            let m = a * c - b * b;
            if m == 0.0 {
                break;
            }
            ((c * r0 - b * r1) / m, (a * r1 - b * r0) / m)
        };
        if !ds.is_finite() || !dt.is_finite() {
            break;
        }
        if ds.abs().max(dt.abs()) < NEWTON_STEP_TOL {
            converged = true;
            break;
        }
        let ns = s - ds;
        let nt = t - dt;
        let nf = c0.eval(ns) - c1.eval(nt);
        iterations += 1;
        if damped && nf.norm() > f.norm() && f.norm() > 0.0 {
            // A damped step that makes things worse will not recover.
            break;
        }
        s = ns;
        t = nt;
        f = nf;
    }
    NewtonOutcome { s, t, iterations, residual: f.norm(), converged, damped }
}

#[derive(Clone)]
struct Piece {
    curve: BezierCurve,
    lo: f64,
    hi: f64,
    flat: bool,
}

impl Piece {
    fn new(curve: BezierCurve, lo: f64, hi: f64) -> Self {
        let flat = curve.relative_flatness() <= FLATNESS_TOL;
        Self { curve, lo, hi, flat }
    }

    fn halves(&self) -> [Piece; 2] {
        let (l, r) = self.curve.subdivide();
        let mid = 0.5 * (self.lo + self.hi);
        [Piece::new(l, self.lo, mid), Piece::new(r, mid, self.hi)]
    }
}

/// True when `b`'s control points all lie strictly outside the band
/// spanned by `a`'s control points about `a`'s chord.
fn fat_line_separates(a: &BezierCurve, b: &BezierCurve, margin: f64) -> bool {
    let p0 = a.start();
    let dir = a.end() - p0;
    let len = dir.norm();
    if len == 0.0 {
        return false;
    }
    let n = Point::new(-dir.y / len, dir.x / len);
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for p in a.control_points() {
        let d = (*p - p0).dot(n);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let (mut blo, mut bhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in b.control_points() {
        let d = (*p - p0).dot(n);
        blo = blo.min(d);
        bhi = bhi.max(d);
    }
    blo > hi + margin || bhi < lo - margin
}

fn may_intersect(a: &Piece, b: &Piece, margin: f64) -> bool {
    let ba = a.curve.bounding_box().inflated(margin);
    let bb = b.curve.bounding_box().inflated(margin);
    boxes_overlap(&ba, &bb)
        && !fat_line_separates(&a.curve, &b.curve, margin)
        && !fat_line_separates(&b.curve, &a.curve, margin)
}

/// Seeds `(s, t)` from the chords of a flat (or depth-limited) pair.
fn chord_seeds(a: &Piece, b: &Piece, scale: f64, seeds: &mut Vec<(f64, f64)>) -> Result<()> {
    let (p, q) = (a.curve.start(), a.curve.end());
    let (r, w) = (b.curve.start(), b.curve.end());
    let d0 = q - p;
    let d1 = w - r;
    let denom = d0.cross(d1);
    let map = |x: &Piece, u: f64| x.lo + u.clamp(0.0, 1.0) * (x.hi - x.lo);
    let l0 = d0.norm();
    let l1 = d1.norm();
    if denom.abs() > 1e-12 * l0 * l1 && l0 > 0.0 && l1 > 0.0 {
        let diff = r - p;
        let u = diff.cross(d1) / denom;
        let v = diff.cross(d0) / denom;
        seeds.push((map(a, u), map(b, v)));
        return Ok(());
    }
    // Parallel or degenerate chords.
    if l0 > 0.0 && l1 > 0.0 && both_flat(a, b) {
        let offset = (r - p).cross(d0).abs() / l0;
        if offset <= REJECT_MARGIN * scale.max(1.0) * 1e3 {
            // Collinear: project b's chord onto a's.
            let u0 = (r - p).dot(d0) / (l0 * l0);
            let u1 = (w - p).dot(d0) / (l0 * l0);
            let (lo, hi) = (u0.min(u1).max(0.0), u0.max(u1).min(1.0));
            if hi - lo > 1e-9 {
                return Err(Error::CoincidentCurves);
            }
        }
    }
    // Try every endpoint pairing and let Newton sort it out.
    for u in [0.0, 1.0] {
        for v in [0.0, 1.0] {
            seeds.push((map(a, u), map(b, v)));
        }
    }
    seeds.push((map(a, 0.5), map(b, 0.5)));
    Ok(())
}

fn both_flat(a: &Piece, b: &Piece) -> bool {
    a.flat && b.flat
}

/// All intersections of `c0` and `c1` with both parameters in `[0, 1]`,
/// sorted by `s`.
pub fn intersect_curves(c0: &BezierCurve, c1: &BezierCurve) -> Result<Vec<CurveIntersection>> {
    let scale = c0.diameter().max(c1.diameter());
    if scale == 0.0 {
        return Ok(if c0.start() == c1.start() {
            vec![CurveIntersection { s: 0.0, t: 0.0, point: c0.start(), transversality: 0.0, tangent: true }]
        } else {
            Vec::new()
        });
    }
    let margin = REJECT_MARGIN * scale;
    let mut level = vec![(Piece::new(c0.clone(), 0.0, 1.0), Piece::new(c1.clone(), 0.0, 1.0))];
    let mut seeds = Vec::new();
    for depth in 0..=MAX_DEPTH {
        if level.is_empty() {
            break;
        }
        if level.len() > CANDIDATE_BUDGET {
            return Err(Error::CoincidentCurves);
        }
        let mut next = Vec::with_capacity(level.len() * 2);
        for (a, b) in level {
            if !may_intersect(&a, &b, margin) {
                continue;
            }
            if both_flat(&a, &b) || depth == MAX_DEPTH {
                chord_seeds(&a, &b, scale, &mut seeds)?;
                continue;
            }
            match (a.flat, b.flat) {
                (true, false) => {
                    for hb in b.halves() {
                        next.push((a.clone(), hb));
                    }
                }
                (false, true) => {
                    for ha in a.halves() {
                        next.push((ha, b.clone()));
                    }
                }
                _ => {
                    let [a0, a1] = a.halves();
                    let [b0, b1] = b.halves();
                    next.push((a0.clone(), b0.clone()));
                    next.push((a0, b1.clone()));
                    next.push((a1.clone(), b0));
                    next.push((a1, b1));
                }
            }
        }
        level = next;
    }

    let mut found: Vec<(CurveIntersection, f64)> = Vec::new();
    for (s0, t0) in seeds {
        let out = newton_refine(c0, c1, s0, t0);
        if !(out.residual <= RESIDUAL_TOL * scale) {
            continue;
        }
        let (Some(s), Some(t)) = (snap(out.s), snap(out.t)) else { continue };
        let d0 = c0.derivative(s);
        let d1 = c1.derivative(t);
        let transversality = d0.cross(d1);
        let tangent = transversality.abs() <= TANGENT_TOL * d0.norm() * d1.norm();
        let residual = (c0.eval(s) - c1.eval(t)).norm();
        found.push((CurveIntersection { s, t, point: c0.eval(s), transversality, tangent }, residual));
    }
    Ok(dedup(found))
}

fn snap(u: f64) -> Option<f64> {
    if u < -ENDPOINT_SNAP || u > 1.0 + ENDPOINT_SNAP {
        None
    } else if u <= ENDPOINT_SNAP {
        Some(0.0)
    } else if u >= 1.0 - ENDPOINT_SNAP {
        Some(1.0)
    } else {
        Some(u)
    }
}

fn dedup(mut found: Vec<(CurveIntersection, f64)>) -> Vec<CurveIntersection> {
    found.sort_by(|a, b| a.0.s.total_cmp(&b.0.s));
    let mut out: Vec<(CurveIntersection, f64)> = Vec::new();
    for (x, res) in found {
        let dup = out.iter_mut().find(|(y, _)| {
            let tol = if x.tangent || y.tangent { TANGENT_DEDUP_TOL } else { DEDUP_TOL };
            (x.s - y.s).abs() <= tol && (x.t - y.t).abs() <= tol
        });
        match dup {
            Some(slot) => {
                // Prefer endpoints, then the smaller residual.
                let on_end = |c: &CurveIntersection| [c.s, c.t].iter().any(|&u| u == 0.0 || u == 1.0);
                if (on_end(&x) && !on_end(&slot.0)) || (on_end(&x) == on_end(&slot.0) && res < slot.1) {
                    *slot = (x, res);
                }
            }
            None => out.push((x, res)),
        }
    }
    let mut out: Vec<CurveIntersection> = out.into_iter().map(|(x, _)| x).collect();
    out.sort_by(|a, b| a.s.total_cmp(&b.s));
    out
}
