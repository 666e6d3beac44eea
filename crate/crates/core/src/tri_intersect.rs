//! Intersection of two Bézier triangles as a set of curved polygons.
//!
//! Every edge is cut at all of its intersections with the other triangle's
//! edges. A piece of an edge of one triangle lies on the boundary of the
//! intersection exactly when it lies inside the other triangle, which is
//! decided at its midpoint by inverting the other triangle's map. The
//! retained pieces, all oriented counterclockwise, are then chained
//! end-to-start into closed loops.
//!
//! Edges that share a curve segment (neighbouring elements, or a refined
//! element against its parent) are detected up front: such an overlap
//! belongs to the boundary once if both triangles lie on the same side of
//! it, and not at all otherwise.

use crate::curve::BezierCurve;
use crate::curve_intersect::{intersect_curves, CurveIntersection, TANGENT_TOL};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::polygon::{CurvedPolygon, SegmentOrigin};
use crate::triangle::{min_barycentric, BezierTriangle};

/// Distance below which an edge point counts as lying on another edge,
/// relative to the larger triangle diameter.
pub const COINCIDENCE_TOL: f64 = 1e-9;
/// Endpoint matching tolerance when chaining pieces into loops.
pub const CHAIN_TOL: f64 = 1e-8;
/// Loops with area below this fraction of the smaller element are dropped.
pub const SLIVER_TOL: f64 = 1e-12;
/// Interior samples used to confirm a suspected edge overlap.
const OVERLAP_SAMPLES: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Transversal,
    Tangent,
    /// At a corner of either triangle.
    Corner,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeIntersectionEvent {
    pub edge_index_0: usize,
    pub edge_index_1: usize,
    pub s: f64,
    pub t: f64,
    pub point: Point,
    pub transversality: f64,
    pub kind: EventKind,
    /// The transversality falls below the tangency threshold.
    pub tangent: bool,
    /// First-order change of the transversality when both curves move
    /// into their interiors; breaks ties at tangent corners.
    pub second_order: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteriorCurve {
    First,
    Second,
    Neither,
}

/// Which of the two curves bounds the intersection just past the event.
pub fn classify_event(e: &EdgeIntersectionEvent) -> Result<InteriorCurve> {
    let by_sign = |x: f64| if x > 0.0 { InteriorCurve::Second } else { InteriorCurve::First };
    match e.kind {
        EventKind::Tangent => Ok(InteriorCurve::Neither),
        EventKind::Transversal => Ok(by_sign(e.transversality)),
        EventKind::Corner if !e.tangent => Ok(by_sign(e.transversality)),
        EventKind::Corner if e.second_order != 0.0 => Ok(by_sign(e.second_order)),
        EventKind::Corner => Err(Error::CornerAmbiguity),
    }
}

/// A shared curve segment between edge `a` (on `[s0, s1]`, `s0 < s1`) and
/// edge `b` (from `t0` to `t1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeOverlap {
    pub edge_index_0: usize,
    pub edge_index_1: usize,
    pub s0: f64,
    pub s1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl EdgeOverlap {
    pub fn same_direction(&self) -> bool {
        self.t1 > self.t0
    }
}

/// Detects a positive-length curve segment shared by `a` and `b`.
pub fn edge_overlap(a: &BezierCurve, b: &BezierCurve, tol: f64) -> Option<((f64, f64), (f64, f64))> {
    if !a.bounding_box().inflated(tol).overlaps(&b.bounding_box().inflated(tol)) {
        return None;
    }
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(4);
    for s in [0.0, 1.0] {
        let (t, d) = b.closest_parameter(a.eval(s));
        if d <= tol {
            pairs.push((s, t));
        }
    }
    for t in [0.0, 1.0] {
        let (s, d) = a.closest_parameter(b.eval(t));
        if d <= tol {
            pairs.push((s, t));
        }
    }
    if pairs.len() < 2 {
        return None;
    }
    let lo = *pairs.iter().min_by(|x, y| x.0.total_cmp(&y.0)).unwrap();
    let hi = *pairs.iter().max_by(|x, y| x.0.total_cmp(&y.0)).unwrap();
    if a.eval(lo.0).distance(a.eval(hi.0)) <= 100.0 * tol {
        return None;
    }
    let (tmin, tmax) = (lo.1.min(hi.1), lo.1.max(hi.1));
    for k in 1..=OVERLAP_SAMPLES {
        let s = lo.0 + (hi.0 - lo.0) * k as f64 / (OVERLAP_SAMPLES + 1) as f64;
        let (t, d) = b.closest_parameter(a.eval(s));
        if d > tol || t < tmin - 1e-9 || t > tmax + 1e-9 {
            return None;
        }
    }
    Some(((lo.0, hi.0), (lo.1, hi.1)))
}

struct EdgeData {
    events: Vec<EdgeIntersectionEvent>,
    overlaps: Vec<EdgeOverlap>,
}

fn scale_of(t0: &BezierTriangle, t1: &BezierTriangle) -> f64 {
    t0.diameter().max(t1.diameter())
}

fn compute_edge_data(t0: &BezierTriangle, t1: &BezierTriangle) -> Result<EdgeData> {
    let e0 = t0.edges();
    let e1 = t1.edges();
    let tol = COINCIDENCE_TOL * scale_of(t0, t1);
    let mut events = Vec::new();
    let mut overlaps = Vec::new();
    for (i, a) in e0.iter().enumerate() {
        for (j, b) in e1.iter().enumerate() {
            if let Some(((s0, s1), (u0, u1))) = edge_overlap(a, b, tol) {
                overlaps.push(EdgeOverlap { edge_index_0: i, edge_index_1: j, s0, s1, t0: u0, t1: u1 });
                for (s, t) in [(s0, u0), (s1, u1)] {
                    let x = CurveIntersection { s, t, point: a.eval(s), transversality: 0.0, tangent: true };
                    events.push(make_event(i, j, a, b, x));
                }
                continue;
            }
            let hits = intersect_curves(a, b).map_err(|e| match e {
                Error::CoincidentCurves => Error::CoincidentEdges { edge0: i, edge1: j },
                other => other,
            })?;
            events.extend(hits.into_iter().map(|x| make_event(i, j, a, b, x)));
        }
    }
    Ok(EdgeData { events, overlaps })
}

fn make_event(i: usize, j: usize, a: &BezierCurve, b: &BezierCurve, x: CurveIntersection) -> EdgeIntersectionEvent {
    let at_end = |u: f64| u == 0.0 || u == 1.0;
    let kind = if at_end(x.s) || at_end(x.t) {
        EventKind::Corner
    } else if x.tangent {
        EventKind::Tangent
    } else {
        EventKind::Transversal
    };
    let inward = |u: f64| if u >= 1.0 { -1.0 } else { 1.0 };
    let second_order = inward(x.s) * a.second_derivative(x.s).cross(b.derivative(x.t))
        + inward(x.t) * a.derivative(x.s).cross(b.second_derivative(x.t));
    let scale = a.derivative(x.s).norm() * b.derivative(x.t).norm();
    let second_order = if second_order.abs() <= TANGENT_TOL * scale { 0.0 } else { second_order };
    EdgeIntersectionEvent {
        edge_index_0: i,
        edge_index_1: j,
        s: x.s,
        t: x.t,
        point: x.point,
        transversality: x.transversality,
        kind,
        tangent: x.tangent,
        second_order,
    }
}

/// All intersections between the three edges of `t0` and those of `t1`.
///
/// Edge pairs sharing a curve segment contribute the segment's two
/// endpoints (as tangent contacts) instead of an error.
pub fn all_edge_intersections(t0: &BezierTriangle, t1: &BezierTriangle) -> Result<Vec<EdgeIntersectionEvent>> {
    Ok(compute_edge_data(t0, t1)?.events)
}

/// Pieces of edges lying on the intersection boundary.
#[derive(Debug, Clone, Copy)]
struct Piece {
    triangle: usize,
    edge: usize,
    start: f64,
    end: f64,
    p0: Point,
    p1: Point,
}

fn sorted_cuts(mut cuts: Vec<f64>) -> Vec<f64> {
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    cuts
}

/// Whether `q` lies strictly inside `tri`.
fn strictly_inside(tri: &BezierTriangle, q: Point) -> Result<bool> {
    Ok(match tri.locate_parameters(q)? {
        Some((s, t)) => min_barycentric(s, t) > 0.0,
        None => false,
    })
}

/// `T0 ∩ T1` as zero or more counterclockwise curved polygons.
pub fn intersect_triangles(t0: &BezierTriangle, t1: &BezierTriangle) -> Result<Vec<CurvedPolygon>> {
    let scale = scale_of(t0, t1);
    let near = COINCIDENCE_TOL * scale;
    if !t0.bounding_box().inflated(near).overlaps(&t1.bounding_box().inflated(near)) {
        return Ok(Vec::new());
    }
    let data = compute_edge_data(t0, t1)?;
    let tris = [t0, t1];
    let edges = [t0.edges(), t1.edges()];

    let mut pieces = Vec::new();
    for side in 0..2 {
        let other = tris[1 - side];
        for e in 0..3 {
            let mut cuts: Vec<f64> = data
                .events
                .iter()
                .filter(|ev| if side == 0 { ev.edge_index_0 == e } else { ev.edge_index_1 == e })
                .map(|ev| if side == 0 { ev.s } else { ev.t })
                .collect();
            let overlaps: Vec<(f64, f64, bool)> = data
                .overlaps
                .iter()
                .filter(|o| if side == 0 { o.edge_index_0 == e } else { o.edge_index_1 == e })
                .map(|o| {
                    let (a, b) = if side == 0 { (o.s0, o.s1) } else { (o.t0.min(o.t1), o.t0.max(o.t1)) };
                    (a, b, o.same_direction())
                })
                .collect();
            cuts.extend(overlaps.iter().flat_map(|&(a, b, _)| [a, b]));
            let cuts = sorted_cuts(cuts);
            let curve = &edges[side][e];
            for w in cuts.windows(2) {
                let (a, b) = (w[0], w[1]);
                let mid = 0.5 * (a + b);
                let keep = match overlaps.iter().find(|&&(lo, hi, _)| lo < mid && mid < hi) {
                    Some(&(_, _, same)) => same && side == 0,
                    None => strictly_inside(other, curve.eval(mid))?,
                };
                if keep {
                    pieces.push(Piece { triangle: side, edge: e, start: a, end: b, p0: curve.eval(a), p1: curve.eval(b) });
                }
            }
        }
    }

    let loops = chain(pieces, CHAIN_TOL * scale)?;
    let min_area = t0.area().abs().min(t1.area().abs());
    let mut out = Vec::new();
    for lp in loops {
        let lp = merge_contiguous(lp);
        let mut segments = Vec::with_capacity(lp.len());
        let mut origins = Vec::with_capacity(lp.len());
        for pc in &lp {
            let curve = &edges[pc.triangle][pc.edge];
            let seg = if pc.start == 0.0 && pc.end == 1.0 { curve.clone() } else { curve.specialize_unchecked(pc.start, pc.end) };
            segments.push(seg);
            origins.push(Some(SegmentOrigin { triangle: pc.triangle, edge: pc.edge, start: pc.start, end: pc.end }));
        }
        snap_endpoints(&mut segments);
        let poly = CurvedPolygon::with_origins(segments, origins)?;
        if poly.area() > SLIVER_TOL * min_area {
            out.push(poly);
        }
    }
    Ok(out)
}

/// Chains pieces end-to-start into closed loops.
fn chain(mut pieces: Vec<Piece>, tol: f64) -> Result<Vec<Vec<Piece>>> {
    let mut loops = Vec::new();
    while !pieces.is_empty() {
        let first = pieces.swap_remove(0);
        let start = first.p0;
        let mut lp = vec![first];
        loop {
            let end = lp.last().unwrap().p1;
            let close = end.distance(start);
            let next = pieces
                .iter()
                .enumerate()
                .map(|(i, p)| (i, p.p0.distance(end)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match next {
                Some((i, d)) if d <= tol && d < close => lp.push(pieces.swap_remove(i)),
                _ if close <= tol => break,
                _ => return Err(Error::TraversalStall { remaining: pieces.len() + lp.len() }),
            }
        }
        loops.push(lp);
    }
    Ok(loops)
}

/// Joins consecutive pieces cut from the same edge at a spurious split
/// point (a tangency, or a cut that only mattered on the other triangle).
fn merge_contiguous(lp: Vec<Piece>) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(lp.len());
    for pc in lp {
        match out.last_mut() {
            Some(last) if last.triangle == pc.triangle && last.edge == pc.edge && last.end == pc.start => {
                last.end = pc.end;
                last.p1 = pc.p1;
            }
            _ => out.push(pc),
        }
    }
    while out.len() > 1 {
        let (first, last) = (out[0], out[out.len() - 1]);
        if first.triangle == last.triangle && first.edge == last.edge && last.end == first.start {
            out[0].start = last.start;
            out[0].p0 = last.p0;
            out.pop();
        } else {
            break;
        }
    }
    out
}

/// Makes each segment start exactly where its predecessor ends, so the
/// boundary is closed to the last bit.
fn snap_endpoints(segments: &mut [BezierCurve]) {
    let n = segments.len();
    for i in 0..n {
        let end = segments[i].end();
        let next = &mut segments[(i + 1) % n];
        let mut pts = next.control_points().to_vec();
        pts[0] = end;
        *next = BezierCurve::from_points_unchecked(pts);
    }
}
