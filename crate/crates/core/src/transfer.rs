//! Conservative L2 projection of a field between two curved meshes.
//!
//! For each target element `T` the local system `M_T t = b` is solved,
//! where `M_T` is the element mass matrix and
//! `b_j = Σ_{T'} ∫_{T ∩ T'} φ_T^(j) q_D|_{T'}`. The intersections
//! `T ∩ T'` are curved polygons and every integrand is a polynomial in
//! global coordinates, so all integrals are exact up to round-off.

use std::cell::RefCell;
use std::collections::VecDeque;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{CurvedMesh, DiscreteField, Element};
use crate::polygon::CurvedPolygon;
use crate::quadrature::TriangleRule;
use crate::tri_intersect::intersect_triangles;

/// Donor elements overlapping one target element, with the overlap regions.
#[derive(Debug, Clone)]
pub struct DonorOverlap {
    pub donor: usize,
    pub polygons: Vec<CurvedPolygon>,
}

impl DonorOverlap {
    pub fn area(&self) -> f64 {
        self.polygons.iter().map(|p| p.area()).sum()
    }
}

#[derive(Debug, Clone)]
pub struct ElementPairing {
    /// Indexed by target element; sorted by donor id.
    pub overlaps: Vec<Vec<DonorOverlap>>,
    /// Number of element-pair intersection tests performed.
    pub probes: usize,
}

impl ElementPairing {
    pub fn donors(&self, target: usize) -> Vec<usize> {
        self.overlaps[target].iter().map(|o| o.donor).collect()
    }

    /// Total overlap area per target element.
    pub fn covered_area(&self, target: usize) -> f64 {
        self.overlaps[target].iter().map(DonorOverlap::area).sum()
    }

    pub fn pair_count(&self) -> usize {
        self.overlaps.iter().map(Vec::len).sum()
    }
}

fn overlap_polygons(target: &CurvedMesh, t: usize, donor: &CurvedMesh, d: usize) -> Result<Vec<CurvedPolygon>> {
    intersect_triangles(&target.element(t).triangle, &donor.element(d).triangle).map_err(|e| e.in_pair(t, d))
}

/// Some donor element overlapping target element `t` with positive area,
/// by exhaustive search.
pub fn find_first_pair(target: &CurvedMesh, t: usize, donor: &CurvedMesh) -> Result<usize> {
    let mut probes = 0;
    first_pair(target, t, donor, &mut probes).map(|(d, _)| d)
}

fn first_pair(target: &CurvedMesh, t: usize, donor: &CurvedMesh, probes: &mut usize) -> Result<(usize, Vec<CurvedPolygon>)> {
    let bb = target.element(t).triangle.bounding_box();
    for d in 0..donor.len() {
        if !bb.overlaps(&donor.element(d).triangle.bounding_box()) {
            continue;
        }
        *probes += 1;
        let polys = overlap_polygons(target, t, donor, d)?;
        if !polys.is_empty() {
            return Ok((d, polys));
        }
    }
    Err(Error::NoIntersection { target: t })
}

/// Pairing by breadth-first searches over both meshes' adjacency.
///
/// Target elements are visited in breadth-first order. Each is seeded with
/// the donors found for the neighbour it was reached from, together with
/// that neighbour's first layer of non-overlapping donors; from the seeds a
/// breadth-first search over donor adjacency collects all overlapping
/// donors. Only the very first element of each connected target component
/// needs an exhaustive search.
pub fn expanding_front(target: &CurvedMesh, donor: &CurvedMesh) -> Result<ElementPairing> {
    let nt = target.len();
    let mut overlaps: Vec<Option<Vec<DonorOverlap>>> = vec![None; nt];
    let mut queued = vec![false; nt];
    let mut probes = 0usize;
    // Donor visit stamps, reset cheaply per target element.
    let mut stamp = vec![usize::MAX; donor.len()];

    for root in 0..nt {
        if queued[root] {
            continue;
        }
        let (d0, polys) = first_pair(target, root, donor, &mut probes)?;
        let mut queue: VecDeque<(usize, Vec<usize>, Option<(usize, Vec<CurvedPolygon>)>)> = VecDeque::new();
        queue.push_back((root, vec![d0], Some((d0, polys))));
        queued[root] = true;
        while let Some((t, seeds, known)) = queue.pop_front() {
            let (found, layer) = donor_search(target, t, donor, &seeds, known, &mut stamp, &mut probes)?;
            let found = if found.is_empty() {
                // Seeds far off (possible on badly graded meshes): search
                // outward without pruning, and fall back to a full scan.
                let (f, _) = donor_search_unpruned(target, t, donor, &seeds, &mut stamp, &mut probes)?;
                if f.is_empty() {
                    let (d, polys) = first_pair(target, t, donor, &mut probes)?;
                    donor_search(target, t, donor, &[d], Some((d, polys)), &mut stamp, &mut probes)?.0
                } else {
                    f
                }
            } else {
                found
            };
            let mut next_seeds: Vec<usize> = found.iter().map(|o| o.donor).collect();
            next_seeds.extend(layer);
            for nb in target.neighbors(t) {
                if !queued[nb] {
                    queued[nb] = true;
                    queue.push_back((nb, next_seeds.clone(), None));
                }
            }
            overlaps[t] = Some(found);
        }
    }
    let overlaps = overlaps.into_iter().map(|o| o.expect("every target element visited")).collect();
    Ok(ElementPairing { overlaps, probes })
}

type SearchResult = (Vec<DonorOverlap>, Vec<usize>);

/// BFS over donor adjacency from `seeds`, expanding only through
/// overlapping donors. Returns the overlaps and the first layer of
/// non-overlapping donors adjacent to them.
fn donor_search(
    target: &CurvedMesh,
    t: usize,
    donor: &CurvedMesh,
    seeds: &[usize],
    known: Option<(usize, Vec<CurvedPolygon>)>,
    stamp: &mut [usize],
    probes: &mut usize,
) -> Result<SearchResult> {
    let mut known = known;
    // Entries carry whether they were reached from an overlapping donor;
    // only those join the layer, so stale seeds are not handed on.
    let mut queue: VecDeque<(usize, bool)> = VecDeque::new();
    // Stamps are per target element, offset to keep the two searches apart.
    let mark = 2 * t;
    for &d in seeds {
        if stamp[d] != mark {
            stamp[d] = mark;
            queue.push_back((d, false));
        }
    }
    let bb = target.element(t).triangle.bounding_box();
    let mut found = Vec::new();
    let mut layer = Vec::new();
    while let Some((d, reached)) = queue.pop_front() {
        let polys = match known.take_if(|(kd, _)| *kd == d) {
            Some((_, p)) => p,
            None if !bb.overlaps(&donor.element(d).triangle.bounding_box()) => Vec::new(),
            None => {
                *probes += 1;
                overlap_polygons(target, t, donor, d)?
            }
        };
        if polys.is_empty() {
            if reached {
                layer.push(d);
            }
            continue;
        }
        found.push(DonorOverlap { donor: d, polygons: polys });
        for nb in donor.neighbors(d) {
            if stamp[nb] != mark {
                stamp[nb] = mark;
                queue.push_back((nb, true));
            }
        }
    }
    found.sort_by_key(|o| o.donor);
    Ok((found, layer))
}

/// Like [`donor_search`] but keeps expanding through non-overlapping
/// donors until the first overlapping one is met.
fn donor_search_unpruned(
    target: &CurvedMesh,
    t: usize,
    donor: &CurvedMesh,
    seeds: &[usize],
    stamp: &mut [usize],
    probes: &mut usize,
) -> Result<SearchResult> {
    let mark = 2 * t + 1;
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &d in seeds {
        stamp[d] = mark;
        queue.push_back(d);
    }
    let bb = target.element(t).triangle.bounding_box();
    while let Some(d) = queue.pop_front() {
        if bb.overlaps(&donor.element(d).triangle.bounding_box()) {
            *probes += 1;
            let polys = overlap_polygons(target, t, donor, d)?;
            if !polys.is_empty() {
                return donor_search(target, t, donor, &[d], Some((d, polys)), stamp, probes);
            }
        }
        for nb in donor.neighbors(d) {
            if stamp[nb] != mark {
                stamp[nb] = mark;
                queue.push_back(nb);
            }
        }
    }
    Ok((Vec::new(), Vec::new()))
}

/// All-pairs pairing with a bounding-box prefilter; the reference for
/// [`expanding_front`].
pub fn brute_force_pairing(target: &CurvedMesh, donor: &CurvedMesh) -> Result<ElementPairing> {
    let per_target: Vec<(Vec<DonorOverlap>, usize)> = (0..target.len())
        .into_par_iter()
        .map(|t| {
            let bb = target.element(t).triangle.bounding_box();
            let mut probes = 0;
            let mut found = Vec::new();
            for d in 0..donor.len() {
                if !bb.overlaps(&donor.element(d).triangle.bounding_box()) {
                    continue;
                }
                probes += 1;
                let polygons = overlap_polygons(target, t, donor, d)?;
                if !polygons.is_empty() {
                    found.push(DonorOverlap { donor: d, polygons });
                }
            }
            if found.is_empty() {
                return Err(Error::NoIntersection { target: t });
            }
            Ok((found, probes))
        })
        .collect::<Result<_>>()?;
    let probes = per_target.iter().map(|x| x.1).sum();
    Ok(ElementPairing { overlaps: per_target.into_iter().map(|x| x.0).collect(), probes })
}

/// `M_ij = ∫_T φ_i φ_j = ∫_U det(Db) φ_i(b) φ_j(b)`.
pub fn assemble_element_mass(elem: &Element) -> DMatrix<f64> {
    let p = elem.basis.degree();
    let n = elem.basis.len();
    let rule = TriangleRule::for_degree(2 * p * p + 2 * (p.max(1) - 1));
    let mut m = DMatrix::zeros(n, n);
    let mut mono = Vec::with_capacity(n);
    let mut v = vec![0.0; n];
    for ((s, t), w) in rule.iter() {
        let wd = w * elem.triangle.jacobian_det(s, t);
        elem.basis.eval_into(elem.triangle.eval(s, t), &mut mono, &mut v);
        for i in 0..n {
            let a = wd * v[i];
            for j in i..n {
                m[(i, j)] += a * v[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
    m
}

/// `b_j = Σ_{T'} Σ_P ∫_P φ_T^(j) q_D|_{T'}` for target element `t`.
pub fn rhs_for_element(
    target: &CurvedMesh,
    t: usize,
    pairing: &ElementPairing,
    donor: &CurvedMesh,
    donor_field: &DiscreteField,
) -> DVector<f64> {
    let tb = &target.element(t).basis;
    let n = tb.len();
    let degree = tb.degree() + donor.degree();
    let mut total = DVector::zeros(n);
    let mut part = vec![0.0; n];
    let mono = RefCell::new(Vec::with_capacity(n));
    for ov in &pairing.overlaps[t] {
        let q = donor.element(ov.donor).basis.combination(donor_field.element(ov.donor));
        for poly in &ov.polygons {
            poly.integrate_with(degree, &mut part, |pt, vals| {
                tb.eval_into(pt, &mut mono.borrow_mut(), vals);
                let qv = q.eval(pt);
                for v in vals.iter_mut() {
                    *v *= qv;
                }
            });
            for (acc, x) in total.iter_mut().zip(&part) {
                *acc += x;
            }
        }
    }
    total
}

/// Pairing and factored mass matrices for a fixed donor/target pair,
/// reusable across fields.
pub struct TransferPlan<'a> {
    donor: &'a CurvedMesh,
    target: &'a CurvedMesh,
    pairing: ElementPairing,
    mass: Vec<Cholesky<f64, Dyn>>,
}

impl<'a> TransferPlan<'a> {
    pub fn new(donor: &'a CurvedMesh, target: &'a CurvedMesh) -> Result<Self> {
        let pairing = expanding_front(target, donor)?;
        Self::with_pairing(donor, target, pairing)
    }

    pub fn with_pairing(donor: &'a CurvedMesh, target: &'a CurvedMesh, pairing: ElementPairing) -> Result<Self> {
        let mass = target
            .elements()
            .par_iter()
            .enumerate()
            .map(|(id, e)| Cholesky::new(assemble_element_mass(e)).ok_or(Error::ElementDegenerate { id }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { donor, target, pairing, mass })
    }

    pub fn pairing(&self) -> &ElementPairing {
        &self.pairing
    }

    pub fn apply(&self, donor_field: &DiscreteField) -> Result<DiscreteField> {
        donor_field.check_matches(self.donor)?;
        let coeffs = (0..self.target.len())
            .into_par_iter()
            .map(|t| {
                let b = rhs_for_element(self.target, t, &self.pairing, self.donor, donor_field);
                let x = self.mass[t].solve(&b);
                if x.iter().all(|v| v.is_finite()) {
                    Ok(x.iter().copied().collect())
                } else {
                    Err(Error::ElementDegenerate { id: t })
                }
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        DiscreteField::new(self.target.degree(), coeffs)
    }

    pub fn conservation(&self, donor_field: &DiscreteField, target_field: &DiscreteField) -> ConservationReport {
        ConservationReport::compute(self.donor, donor_field, self.target, target_field, &self.pairing)
    }
}

/// Galerkin projection of `donor_field` onto `target`'s shape functions.
pub fn transfer_field(donor: &CurvedMesh, donor_field: &DiscreteField, target: &CurvedMesh) -> Result<DiscreteField> {
    TransferPlan::new(donor, target)?.apply(donor_field)
}

/// `(∫ q_D over the donor mesh, ∫ q_T over the target mesh)`.
pub fn conservation_report(
    donor: &CurvedMesh,
    donor_field: &DiscreteField,
    target: &CurvedMesh,
    target_field: &DiscreteField,
) -> (f64, f64) {
    (donor.integral(donor_field), target.integral(target_field))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    /// `∫ q_D` over the whole donor mesh.
    pub donor_total: f64,
    /// `∫ q_D` over the part of the donor covered by the target.
    pub donor_on_target: f64,
    /// `∫ q_T` over the target mesh.
    pub target_total: f64,
}

impl ConservationReport {
    pub fn compute(
        donor: &CurvedMesh,
        donor_field: &DiscreteField,
        target: &CurvedMesh,
        target_field: &DiscreteField,
        pairing: &ElementPairing,
    ) -> Self {
        let donor_on_target = pairing
            .overlaps
            .par_iter()
            .map(|ovs| {
                ovs.iter()
                    .map(|ov| {
                        let q = donor.element(ov.donor).basis.combination(donor_field.element(ov.donor));
                        ov.polygons.iter().map(|p| p.integrate(&q)).sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .sum();
        Self { donor_total: donor.integral(donor_field), donor_on_target, target_total: target.integral(target_field) }
    }

    /// `|∫ q_T - ∫_{target} q_D| / |∫_{target} q_D|` (absolute when the
    /// donor integral vanishes).
    pub fn relative_mismatch(&self) -> f64 {
        let diff = (self.target_total - self.donor_on_target).abs();
        if self.donor_on_target == 0.0 { diff } else { diff / self.donor_on_target.abs() }
    }
}
