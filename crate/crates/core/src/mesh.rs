//! Curved triangular meshes, global-coordinates shape functions and
//! discontinuous fields.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::net::net_len;
use crate::point::Point;
use crate::poly::{monomial_values, BivariatePolynomial, Frame};
use crate::quadrature::TriangleRule;
use crate::triangle::{BezierTriangle, StandardNodes};

/// Largest accepted singular-value ratio of a node Vandermonde matrix.
pub const MAX_BASIS_CONDITION: f64 = 1e12;
/// Required accuracy of `φ_j(n_i) = δ_ij`.
pub const KRONECKER_TOL: f64 = 1e-10;
/// Corner coordinates closer than this are the same mesh vertex.
pub const VERTEX_TOL: f64 = 1e-9;
/// Extra quadrature degree when the integrand involves a non-polynomial
/// reference function.
pub const NONPOLYNOMIAL_EXCESS: usize = 4;

/// The `(p+1)(p+2)/2` polynomials of total degree `p` in `x, y` that are
/// dual to an element's standard nodes.
#[derive(Debug, Clone)]
pub struct ElementBasis {
    degree: usize,
    frame: Frame,
    /// Column `j` holds the monomial coefficients of `φ_j`.
    coeffs: DMatrix<f64>,
}

impl ElementBasis {
    pub fn len(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Values of every basis function at `p`.
    pub fn eval_into(&self, p: Point, mono: &mut Vec<f64>, out: &mut [f64]) {
        let (x, y) = self.frame.local(p);
        monomial_values(self.degree, x, y, mono);
        let n = self.len();
        for (j, o) in out.iter_mut().enumerate().take(n) {
            let col = self.coeffs.column(j);
            *o = col.iter().zip(mono.iter()).map(|(c, m)| c * m).sum();
        }
    }

    pub fn eval(&self, p: Point) -> Vec<f64> {
        let mut mono = Vec::with_capacity(self.len());
        let mut out = vec![0.0; self.len()];
        self.eval_into(p, &mut mono, &mut out);
        out
    }

    /// `Σ c_j φ_j(p)`.
    pub fn combine(&self, c: &[f64], p: Point) -> f64 {
        self.eval(p).iter().zip(c).map(|(a, b)| a * b).sum()
    }

    pub fn function(&self, j: usize) -> BivariatePolynomial {
        BivariatePolynomial::new(self.degree, self.frame, self.coeffs.column(j).iter().copied().collect())
    }

    /// `Σ c_j φ_j` as a single polynomial.
    pub fn combination(&self, c: &[f64]) -> BivariatePolynomial {
        let v = &self.coeffs * nalgebra::DVector::from_column_slice(c);
        BivariatePolynomial::new(self.degree, self.frame, v.iter().copied().collect())
    }
}

/// Shape functions in global coordinates for an element with the given
/// standard nodes; `id` only labels errors.
pub fn build_shape_basis(nodes: &StandardNodes, id: usize) -> Result<ElementBasis> {
    let p = nodes.degree();
    let n = net_len(p);
    let frame = Frame::fitted(nodes.nodes());
    let mut mono = Vec::with_capacity(n);
    let mut v = DMatrix::zeros(n, n);
    for (i, node) in nodes.nodes().iter().enumerate() {
        let (x, y) = frame.local(*node);
        monomial_values(p, x, y, &mut mono);
        for (m, val) in mono.iter().enumerate() {
            v[(i, m)] = *val;
        }
    }
    let sv = v.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 0.0) || smax / smin > MAX_BASIS_CONDITION {
        return Err(Error::ElementDegenerate { id });
    }
    let coeffs = v.clone().try_inverse().ok_or(Error::ElementDegenerate { id })?;
    let basis = ElementBasis { degree: p, frame, coeffs };
    for (i, node) in nodes.nodes().iter().enumerate() {
        for (j, val) in basis.eval(*node).iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            if (val - want).abs() > KRONECKER_TOL {
                return Err(Error::ElementDegenerate { id });
            }
        }
    }
    Ok(basis)
}

#[derive(Debug, Clone)]
pub struct Element {
    pub nodes: StandardNodes,
    pub triangle: BezierTriangle,
    pub basis: ElementBasis,
}

impl Element {
    fn new(nodes: StandardNodes, triangle: BezierTriangle, id: usize) -> Result<Self> {
        if !triangle.is_valid() {
            return Err(Error::InvalidElement { id });
        }
        let basis = build_shape_basis(&nodes, id)?;
        Ok(Self { nodes, triangle, basis })
    }

    /// `∫_T F = ∫_U det(Db) F∘b`, with a rule exact for integrand degree
    /// `degree` on `U`.
    pub fn integrate_over(&self, degree: usize, f: impl Fn(Point) -> f64) -> f64 {
        let rule = TriangleRule::for_degree(degree);
        rule.iter()
            .map(|((s, t), w)| w * self.triangle.jacobian_det(s, t) * f(self.triangle.eval(s, t)))
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct CurvedMesh {
    degree: usize,
    elements: Vec<Element>,
    adjacency: Vec<[Option<usize>; 3]>,
}

impl CurvedMesh {
    /// Mesh from standard nodes; rejects inverted or degenerate elements.
    pub fn from_nodes(degree: usize, nodes: Vec<StandardNodes>) -> Result<Self> {
        let elements = nodes
            .into_par_iter()
            .enumerate()
            .map(|(id, n)| {
                if n.degree() != degree {
                    return Err(Error::DegreeMismatch { expected: degree, found: n.degree() });
                }
                let tri = n.to_triangle()?;
                Element::new(n, tri, id)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(degree, elements))
    }

    /// Mesh from control nets.
    pub fn from_triangles(degree: usize, triangles: Vec<BezierTriangle>) -> Result<Self> {
        let elements = triangles
            .into_par_iter()
            .enumerate()
            .map(|(id, tri)| {
                if tri.degree() != degree {
                    return Err(Error::DegreeMismatch { expected: degree, found: tri.degree() });
                }
                Element::new(tri.to_nodes(), tri, id)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(degree, elements))
    }

    fn assemble(degree: usize, elements: Vec<Element>) -> Self {
        let adjacency = build_adjacency(&elements);
        Self { degree, elements, adjacency }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, id: usize) -> &Element {
        &self.elements[id]
    }

    pub fn adjacency(&self) -> &[[Option<usize>; 3]] {
        &self.adjacency
    }

    pub fn neighbors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[id].iter().flatten().copied()
    }

    pub fn area(&self) -> f64 {
        self.elements.iter().map(|e| e.triangle.area()).sum()
    }

    /// Largest control-net diameter over all elements.
    pub fn mesh_size(&self) -> f64 {
        self.elements.iter().map(|e| e.triangle.diameter()).fold(0.0, f64::max)
    }

    /// Every element split into four by midpoint subdivision.
    pub fn refine(&self) -> Result<CurvedMesh> {
        let children: Vec<BezierTriangle> = self.elements.iter().flat_map(|e| e.triangle.subdivide()).collect();
        Self::from_triangles(self.degree, children)
    }

    /// Largest distance between matching samples of shared edges.
    pub fn shared_edge_mismatch(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, adj) in self.adjacency.iter().enumerate() {
            for (ea, nb) in adj.iter().enumerate() {
                let Some(b) = *nb else { continue };
                let eb = self.adjacency[b].iter().position(|x| *x == Some(a)).expect("symmetric adjacency");
                let ca = &self.elements[a].triangle.edges()[ea];
                let cb = &self.elements[b].triangle.edges()[eb];
                for i in 0..=8 {
                    let s = i as f64 / 8.0;
                    worst = worst.max(ca.eval(s).distance(cb.eval(1.0 - s)));
                }
            }
        }
        worst
    }

    pub fn nodal_interpolant(&self, f: impl Fn(Point) -> f64 + Sync) -> DiscreteField {
        let coeffs = self.elements.par_iter().map(|e| e.nodes.nodes().iter().map(|n| f(*n)).collect()).collect();
        DiscreteField { degree: self.degree, coeffs }
    }

    /// Quadrature degree on `U` that integrates a product of `factors`
    /// degree-`p` global polynomials times `det(Db)` exactly.
    pub fn exact_degree(&self, factors: usize) -> usize {
        let p = self.degree;
        factors * p * p + 2 * (p - 1)
    }

    /// `∫ g` over the mesh.
    pub fn integral(&self, g: &DiscreteField) -> f64 {
        let deg = self.exact_degree(1);
        self.elements
            .par_iter()
            .zip(&g.coeffs)
            .map(|(e, c)| {
                let poly = e.basis.combination(c);
                e.integrate_over(deg, |p| poly.eval(p))
            })
            .sum()
    }

    /// `∫ f` over the mesh for a general function.
    pub fn integral_of(&self, f: impl Fn(Point) -> f64 + Sync) -> f64 {
        let deg = self.exact_degree(1) + NONPOLYNOMIAL_EXCESS;
        self.elements.par_iter().map(|e| e.integrate_over(deg, &f)).sum()
    }

    /// `‖g - reference‖_2`, or `‖g‖_2` without a reference.
    pub fn l2_norm(&self, g: &DiscreteField, reference: Option<&(dyn Fn(Point) -> f64 + Sync)>) -> f64 {
        let deg = self.exact_degree(2) + if reference.is_some() { NONPOLYNOMIAL_EXCESS } else { 0 };
        let sq: f64 = self
            .elements
            .par_iter()
            .zip(&g.coeffs)
            .map(|(e, c)| {
                let poly = e.basis.combination(c);
                e.integrate_over(deg, |p| {
                    let d = poly.eval(p) - reference.map_or(0.0, |r| r(p));
                    d * d
                })
            })
            .sum();
        sq.max(0.0).sqrt()
    }

    /// `‖f‖_2` of a function over the mesh domain.
    pub fn l2_norm_of(&self, f: impl Fn(Point) -> f64 + Sync) -> f64 {
        let deg = self.exact_degree(2) + NONPOLYNOMIAL_EXCESS;
        self.elements.par_iter().map(|e| e.integrate_over(deg, |p| f(p).powi(2))).sum::<f64>().sqrt()
    }
}

/// Neighbours across each edge, found by matching corner vertices.
fn build_adjacency(elements: &[Element]) -> Vec<[Option<usize>; 3]> {
    let corners: Vec<Point> = elements.iter().flat_map(|e| e.triangle.corners()).collect();
    let ids = cluster_vertices(&corners, VERTEX_TOL);
    let mut by_edge: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    for el in 0..elements.len() {
        for edge in 0..3 {
            let a = ids[3 * el + edge];
            let b = ids[3 * el + (edge + 1) % 3];
            by_edge.entry((a.min(b), a.max(b))).or_default().push((el, edge));
        }
    }
    let mut adj = vec![[None; 3]; elements.len()];
    for list in by_edge.values() {
        if let [(e0, k0), (e1, k1)] = list[..] {
            adj[e0][k0] = Some(e1);
            adj[e1][k1] = Some(e0);
        }
    }
    adj
}

/// Labels points so that points within `tol` (transitively) share a label.
fn cluster_vertices(points: &[Point], tol: f64) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j].x - points[i].x > tol {
                break;
            }
            if points[i].distance(points[j]) <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    (0..points.len()).map(|i| find(&mut parent, i)).collect()
}

/// Per-element coefficients over each element's shape basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    degree: usize,
    coeffs: Vec<Vec<f64>>,
}

impl DiscreteField {
    pub fn new(degree: usize, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        let n = net_len(degree);
        for (element, c) in coeffs.iter().enumerate() {
            if c.len() != n {
                return Err(Error::FieldShapeMismatch { element, expected: n, found: c.len() });
            }
        }
        Ok(Self { degree, coeffs })
    }

    pub fn constant(mesh: &CurvedMesh, c: f64) -> Self {
        Self { degree: mesh.degree(), coeffs: vec![vec![c; net_len(mesh.degree())]; mesh.len()] }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn element(&self, id: usize) -> &[f64] {
        &self.coeffs[id]
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Errors unless the field fits `mesh`.
    pub fn check_matches(&self, mesh: &CurvedMesh) -> Result<()> {
        if self.degree != mesh.degree() {
            return Err(Error::DegreeMismatch { expected: mesh.degree(), found: self.degree });
        }
        if self.coeffs.len() != mesh.len() {
            return Err(Error::FieldShapeMismatch { element: self.coeffs.len().min(mesh.len()), expected: mesh.len(), found: self.coeffs.len() });
        }
        Ok(())
    }

    /// Field value at `p` using element `id`'s polynomial.
    pub fn eval(&self, mesh: &CurvedMesh, id: usize, p: Point) -> f64 {
        mesh.element(id).basis.combine(&self.coeffs[id], p)
    }

    /// Largest coefficient difference.
    pub fn max_difference(&self, other: &DiscreteField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}
