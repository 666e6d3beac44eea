//! Bézier triangles: the curved mesh element.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::curve::{BezierCurve, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::net::{self, net_index, net_len};
use crate::point::{BoundingBox, Point};

/// A degree-`p` map from the unit triangle `U` given by its control net.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierTriangle {
    degree: usize,
    net: Vec<Point>,
}

/// Images `b(j/p, k/p)` of the uniform parameter lattice, in net order.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardNodes {
    degree: usize,
    nodes: Vec<Point>,
}

fn check_count(degree: usize, found: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        return Err(Error::DegreeTooHigh { degree, max: MAX_DEGREE });
    }
    let expected = net_len(degree);
    if found != expected {
        return Err(Error::ControlPointCount { expected, found });
    }
    Ok(())
}

/// Degree implied by a point count, if it is triangular.
pub fn degree_from_count(count: usize) -> Option<usize> {
    (0..=MAX_DEGREE).find(|&p| net_len(p) == count)
}

impl StandardNodes {
    pub fn new(degree: usize, nodes: Vec<Point>) -> Result<Self> {
        check_count(degree, nodes.len())?;
        Ok(Self { degree, nodes })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<Point> {
        self.nodes
    }

    /// Nodes of an affine (straight-sided) element with the given corners.
    pub fn affine(degree: usize, corners: [Point; 3]) -> Self {
        let nodes = net::lattice(degree)
            .into_iter()
            .map(|(s, t)| corners[0] * (1.0 - s - t) + corners[1] * s + corners[2] * t)
            .collect();
        Self { degree, nodes }
    }

    /// Solve for the control net interpolating these nodes.
    pub fn to_triangle(&self) -> Result<BezierTriangle> {
        let inv = lattice_inverse(self.degree)?;
        let n = self.nodes.len();
        let net = (0..n)
            .map(|row| {
                let mut acc = Point::default();
                for (col, node) in self.nodes.iter().enumerate() {
                    acc += *node * inv[(row, col)];
                }
                acc
            })
            .collect();
        Ok(BezierTriangle { degree: self.degree, net })
    }
}

static LATTICE_INVERSES: [OnceLock<std::result::Result<DMatrix<f64>, String>>; MAX_DEGREE + 1] =
    [const { OnceLock::new() }; MAX_DEGREE + 1];

/// Inverse of the Bernstein collocation matrix on the degree-`p` lattice.
fn lattice_inverse(p: usize) -> Result<&'static DMatrix<f64>> {
    if p > MAX_DEGREE {
        return Err(Error::DegreeTooHigh { degree: p, max: MAX_DEGREE });
    }
    let cached = LATTICE_INVERSES[p].get_or_init(|| {
        let n = net_len(p);
        let pts = net::lattice(p);
        let a = DMatrix::from_fn(n, n, |i, m| net::bernstein_basis(p, pts[i].0, pts[i].1)[m]);
        let inv = a.clone().try_inverse().ok_or_else(|| format!("degree {p} lattice matrix is singular"))?;
        let cond = a.lp_norm(1) * inv.lp_norm(1);
        if !cond.is_finite() || cond > 1e13 {
            return Err(format!("degree {p} lattice matrix condition estimate {cond:e}"));
        }
        Ok(inv)
    });
    cached.as_ref().map_err(|m| Error::SingularSystem(m.clone()))
}

/// Outcome of Newton inversion started inside one candidate cell.
enum NewtonOutcome {
    Converged(f64, f64),
    Diverged,
    Stalled(f64, f64, f64),
}

impl BezierTriangle {
    pub fn new(degree: usize, net: Vec<Point>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::ControlPointCount { expected: 3, found: net.len() });
        }
        check_count(degree, net.len())?;
        Ok(Self { degree, net })
    }

    /// Straight-sided triangle with the given corners.
    pub fn affine(degree: usize, corners: [Point; 3]) -> Self {
        let net = StandardNodes::affine(degree, corners).nodes;
        // Affine maps have equally spaced control nets, which coincide with the nodes.
        Self { degree, net }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn control_net(&self) -> &[Point] {
        &self.net
    }

    pub fn control_point(&self, j: usize, k: usize) -> Point {
        self.net[net_index(j, k, self.degree)]
    }

    pub fn corners(&self) -> [Point; 3] {
        let p = self.degree;
        [self.control_point(0, 0), self.control_point(p, 0), self.control_point(0, p)]
    }

    pub fn eval(&self, s: f64, t: f64) -> Point {
        net::eval(&self.net, self.degree, s, t)
    }

    pub fn to_nodes(&self) -> StandardNodes {
        let nodes = net::lattice(self.degree).into_iter().map(|(s, t)| self.eval(s, t)).collect();
        StandardNodes { degree: self.degree, nodes }
    }

    /// Bottom `b(r, 0)`, hypotenuse `b(1 - r, r)` and left `b(0, 1 - r)` edges.
    pub fn edges(&self) -> [BezierCurve; 3] {
        let p = self.degree;
        let bottom = (0..=p).map(|m| self.control_point(m, 0)).collect();
        let hyp = (0..=p).map(|m| self.control_point(p - m, m)).collect();
        let left = (0..=p).map(|m| self.control_point(0, p - m)).collect();
        [
            BezierCurve::from_points_unchecked(bottom),
            BezierCurve::from_points_unchecked(hyp),
            BezierCurve::from_points_unchecked(left),
        ]
    }

    /// Partial derivatives `(b_s, b_t)` at `(s, t)`.
    pub fn jacobian(&self, s: f64, t: f64) -> (Point, Point) {
        let (ds, dt) = net::hodographs(&self.net, self.degree);
        let q = self.degree - 1;
        (net::eval(&ds, q, s, t), net::eval(&dt, q, s, t))
    }

    pub fn jacobian_det(&self, s: f64, t: f64) -> f64 {
        let (bs, bt) = self.jacobian(s, t);
        bs.cross(bt)
    }

    /// Bernstein coefficients of `det(Db)`, a polynomial of degree `2(p - 1)`.
    pub fn jacobian_det_net(&self) -> (Vec<f64>, usize) {
        let p = self.degree;
        let (ds, dt) = net::hodographs(&self.net, p);
        let q = p - 1;
        let xs: Vec<f64> = ds.iter().map(|v| v.x).collect();
        let ys: Vec<f64> = ds.iter().map(|v| v.y).collect();
        let xt: Vec<f64> = dt.iter().map(|v| v.x).collect();
        let yt: Vec<f64> = dt.iter().map(|v| v.y).collect();
        let a = net::product(&xs, q, &yt, q);
        let b = net::product(&xt, q, &ys, q);
        (a.iter().zip(&b).map(|(u, v)| u - v).collect(), 2 * q)
    }

    /// Exact area `∫_U det(Db)`; signed for inverted maps.
    pub fn area(&self) -> f64 {
        let (coeffs, d) = self.jacobian_det_net();
        // Every degree-d Bernstein polynomial integrates to |U| / net_len(d).
        coeffs.iter().sum::<f64>() * 0.5 / net_len(d) as f64
    }

    /// Certify `det(Db) > 0` on all of `U`.
    pub fn is_valid(&self) -> bool {
        let (coeffs, d) = self.jacobian_det_net();
        if coeffs.iter().all(|&c| c > 0.0) {
            return true;
        }
        let lattice = net::lattice(self.degree + 1);
        if lattice.iter().any(|&(s, t)| net::eval(&coeffs, d, s, t) <= 0.0) {
            return false;
        }
        positive_by_subdivision(&coeffs, d, 4)
    }

    /// Four children from midpoint subdivision of `U`, corner triangles first.
    pub fn subdivide(&self) -> [BezierTriangle; 4] {
        net::SUBDIVISION_CORNERS.map(|corners| self.specialize(corners))
    }

    /// Restriction to the parameter triangle with the given corners.
    pub fn specialize(&self, corners: [(f64, f64); 3]) -> BezierTriangle {
        BezierTriangle { degree: self.degree, net: net::specialize(&self.net, self.degree, corners) }
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox::from_points(&self.net)
    }

    pub fn diameter(&self) -> f64 {
        crate::point::diameter(&self.net)
    }

    /// Parameters `(s, t)` in `U` with `b(s, t) = q`, or `None` when `q`
    /// lies outside the element.
    pub fn locate_point(&self, q: Point) -> Result<Option<(f64, f64)>> {
        match self.locate_parameters(q)? {
            Some((s, t)) if in_unit_triangle(s, t, LOCATE_MEMBERSHIP_TOL) => Ok(Some((s, t))),
            _ => Ok(None),
        }
    }

    /// Newton-refined parameters for `q`, possibly slightly outside `U`.
    ///
    /// Returns the candidate closest to `U` among converged roots; `None`
    /// when no cell of the subdivision can contain `q`.
    pub(crate) fn locate_parameters(&self, q: Point) -> Result<Option<(f64, f64)>> {
        let diam = self.diameter();
        let inflate = 1e-8 * diam;
        let mut candidates = Vec::new();
        let mut stack = vec![(self.net.clone(), [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], 0u32)];
        while let Some((cell, corners, depth)) = stack.pop() {
            if !BoundingBox::from_points(&cell).inflated(inflate).contains(q) {
                continue;
            }
            if depth == LOCATE_DEPTH {
                let s = (corners[0].0 + corners[1].0 + corners[2].0) / 3.0;
                let t = (corners[0].1 + corners[1].1 + corners[2].1) / 3.0;
                candidates.push((s, t));
                continue;
            }
            for child in net::SUBDIVISION_CORNERS {
                let child_net = net::specialize(&cell, self.degree, child);
                let map = |(a, b): (f64, f64)| {
                    let l = 1.0 - a - b;
                    (
                        l * corners[0].0 + a * corners[1].0 + b * corners[2].0,
                        l * corners[0].1 + a * corners[1].1 + b * corners[2].1,
                    )
                };
                stack.push((child_net, [map(child[0]), map(child[1]), map(child[2])], depth + 1));
            }
        }
        if candidates.is_empty() {
            return Ok(None);
        }
        let mut best: Option<(f64, f64)> = None;
        let mut stalled = None;
        for (s0, t0) in candidates {
            match self.newton_invert(q, s0, t0, diam) {
                NewtonOutcome::Converged(s, t) => {
                    if in_unit_triangle(s, t, LOCATE_MEMBERSHIP_TOL) {
                        return Ok(Some((s, t)));
                    }
                    let score = -min_barycentric(s, t);
                    if best.map_or(true, |(bs, bt)| score < -min_barycentric(bs, bt)) {
                        best = Some((s, t));
                    }
                }
                NewtonOutcome::Diverged => {}
                // A stall far from any root comes from a cell whose box
                // merely grazed `q`; a cell containing a true root converges.
                // Outside U the map need not be invertible at all.
                NewtonOutcome::Stalled(s, t, r)
                    if in_unit_triangle(s, t, LOCATE_MEMBERSHIP_TOL) && r <= LOCATE_STALL_RESIDUAL * diam =>
                {
                    stalled = Some((s, t, r))
                }
                NewtonOutcome::Stalled(..) => {}
            }
        }
        if best.is_some() {
            return Ok(best);
        }
        match stalled {
            Some((s, t, residual)) => Err(Error::NewtonFailure { s, t, residual }),
            None => Ok(None),
        }
    }

    fn newton_invert(&self, q: Point, mut s: f64, mut t: f64, diam: f64) -> NewtonOutcome {
        let (ds, dt) = net::hodographs(&self.net, self.degree);
        let qd = self.degree - 1;
        for _ in 0..LOCATE_NEWTON_ITERS {
            let f = self.eval(s, t) - q;
            let bs = net::eval(&ds, qd, s, t);
            let bt = net::eval(&dt, qd, s, t);
            let det = bs.cross(bt);
            if det == 0.0 || !det.is_finite() {
                return NewtonOutcome::Diverged;
            }
            let step_s = f.cross(bt) / det;
            let step_t = bs.cross(f) / det;
            s -= step_s;
            t -= step_t;
            if min_barycentric(s, t) < -0.5 || !s.is_finite() || !t.is_finite() {
                return NewtonOutcome::Diverged;
            }
            if step_s.abs().max(step_t.abs()) < LOCATE_NEWTON_TOL {
                return NewtonOutcome::Converged(s, t);
            }
        }
        let residual = (self.eval(s, t) - q).norm();
        if residual <= 1e-10 * diam.max(f64::MIN_POSITIVE) {
            NewtonOutcome::Converged(s, t)
        } else {
            NewtonOutcome::Stalled(s, t, residual)
        }
    }
}

/// Subdivision depth at which candidate cells have side 1/16.
const LOCATE_DEPTH: u32 = 4;
const LOCATE_NEWTON_ITERS: usize = 20;
const LOCATE_NEWTON_TOL: f64 = 1e-13;
const LOCATE_MEMBERSHIP_TOL: f64 = 1e-12;
/// A stalled Newton iterate closer than this (relative to the diameter)
/// counts as a numerical failure rather than a miss.
const LOCATE_STALL_RESIDUAL: f64 = 1e-6;

pub(crate) fn min_barycentric(s: f64, t: f64) -> f64 {
    s.min(t).min(1.0 - s - t)
}

pub(crate) fn in_unit_triangle(s: f64, t: f64, tol: f64) -> bool {
    min_barycentric(s, t) >= -tol
}

fn positive_by_subdivision(coeffs: &[f64], d: usize, levels: u32) -> bool {
    if coeffs.iter().all(|&c| c > 0.0) {
        return true;
    }
    if levels == 0 {
        return false;
    }
    net::SUBDIVISION_CORNERS.iter().all(|&corners| {
        let child = net::specialize(coeffs, d, corners);
        let corners_positive = [child[0], child[net_index(d, 0, d)], child[net_index(0, d, d)]]
            .iter()
            .all(|&c| c > 0.0);
        corners_positive && positive_by_subdivision(&child, d, levels - 1)
    })
}
