//! Index arithmetic and de Casteljau machinery for triangular control nets.
//!
//! A degree-`p` net stores `(p+1)(p+2)/2` values indexed by `(j, k)` with
//! `i = p - j - k`, laid out lexicographically in `(k, j)`:
//! all `k = 0` entries by increasing `j`, then `k = 1`, and so on.

use std::ops::{Add, Mul};

pub trait NetValue: Copy + Add<Output = Self> + Mul<f64, Output = Self> {}
impl<T: Copy + Add<Output = T> + Mul<f64, Output = T>> NetValue for T {}

#[inline]
pub fn net_len(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Position of `(j, k)` in a degree-`p` net.
#[inline]
pub fn net_index(j: usize, k: usize, p: usize) -> usize {
    debug_assert!(j + k <= p);
    k * (p + 1) - k * (k.saturating_sub(1)) / 2 + j
}

/// Multi-indices `(i, j, k)` in storage order.
pub fn multi_indices(p: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..=p).flat_map(move |k| (0..=p - k).map(move |j| (p - j - k, j, k)))
}

/// Parameter-space lattice point `(j/p, k/p)` for every multi-index.
pub fn lattice(p: usize) -> Vec<(f64, f64)> {
    if p == 0 {
        return vec![(0.0, 0.0)];
    }
    multi_indices(p).map(|(_, j, k)| (j as f64 / p as f64, k as f64 / p as f64)).collect()
}

/// One de Casteljau reduction step with barycentric weights of `(s, t)`.
fn reduce<T: NetValue>(net: &[T], p: usize, s: f64, t: f64) -> Vec<T> {
    let l1 = 1.0 - s - t;
    let q = p - 1;
    let mut out = Vec::with_capacity(net_len(q));
    for k in 0..=q {
        for j in 0..=q - k {
            let a = net[net_index(j, k, p)];
            let b = net[net_index(j + 1, k, p)];
            let c = net[net_index(j, k + 1, p)];
            out.push(a * l1 + b * s + c * t);
        }
    }
    out
}

pub fn eval<T: NetValue>(net: &[T], p: usize, s: f64, t: f64) -> T {
    if p == 0 {
        return net[0];
    }
    let mut cur = reduce(net, p, s, t);
    for d in (1..p).rev() {
        cur = reduce(&cur, d, s, t);
    }
    cur[0]
}

/// Blossom of the net evaluated at the given `p` parameter pairs.
pub fn blossom<T: NetValue>(net: &[T], p: usize, params: &[(f64, f64)]) -> T {
    debug_assert_eq!(params.len(), p);
    if p == 0 {
        return net[0];
    }
    let mut cur = reduce(net, p, params[0].0, params[0].1);
    for (d, &(s, t)) in (1..p).rev().zip(&params[1..]) {
        cur = reduce(&cur, d, s, t);
    }
    cur[0]
}

/// Net of the restriction to the parameter-space triangle with corners
/// `u0, u1, u2`, i.e. of `(s, t) -> b(u0 + s (u1 - u0) + t (u2 - u0))`.
pub fn specialize<T: NetValue>(net: &[T], p: usize, corners: [(f64, f64); 3]) -> Vec<T> {
    let mut params = Vec::with_capacity(p);
    multi_indices(p)
        .map(|(i, j, k)| {
            params.clear();
            params.extend(std::iter::repeat(corners[0]).take(i));
            params.extend(std::iter::repeat(corners[1]).take(j));
            params.extend(std::iter::repeat(corners[2]).take(k));
            blossom(net, p, &params)
        })
        .collect()
}

/// Parameter-space corners of the four children produced by midpoint
/// subdivision: the three corner triangles, then the middle one.
pub const SUBDIVISION_CORNERS: [[(f64, f64); 3]; 4] = [
    [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5)],
    [(0.5, 0.0), (1.0, 0.0), (0.5, 0.5)],
    [(0.0, 0.5), (0.5, 0.5), (0.0, 1.0)],
    [(0.5, 0.5), (0.0, 0.5), (0.5, 0.0)],
];

/// Nets of the partial derivatives `b_s` and `b_t` (degree `p - 1`).
pub fn hodographs<T: NetValue>(net: &[T], p: usize) -> (Vec<T>, Vec<T>) {
    let q = p - 1;
    let n = p as f64;
    let mut ds = Vec::with_capacity(net_len(q));
    let mut dt = Vec::with_capacity(net_len(q));
    for k in 0..=q {
        for j in 0..=q - k {
            let base = net[net_index(j, k, p)];
            ds.push((net[net_index(j + 1, k, p)] + base * -1.0) * n);
            dt.push((net[net_index(j, k + 1, p)] + base * -1.0) * n);
        }
    }
    (ds, dt)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

pub fn trinomial(n: usize, i: usize, j: usize, k: usize) -> f64 {
    factorial(n) / (factorial(i) * factorial(j) * factorial(k))
}

/// Bernstein coefficients of the product of two scalar Bernstein nets.
pub fn product(a: &[f64], pa: usize, b: &[f64], pb: usize) -> Vec<f64> {
    let pc = pa + pb;
    let mut c = vec![0.0; net_len(pc)];
    for (ia, ja, ka) in multi_indices(pa) {
        let wa = trinomial(pa, ia, ja, ka) * a[net_index(ja, ka, pa)];
        for (ib, jb, kb) in multi_indices(pb) {
            let wb = trinomial(pb, ib, jb, kb) * b[net_index(jb, kb, pb)];
            c[net_index(ja + jb, ka + kb, pc)] += wa * wb;
        }
    }
    for (i, j, k) in multi_indices(pc) {
        c[net_index(j, k, pc)] /= trinomial(pc, i, j, k);
    }
    c
}

/// Values of every degree-`p` Bernstein basis function at `(s, t)`, in net order.
pub fn bernstein_basis(p: usize, s: f64, t: f64) -> Vec<f64> {
    let l1 = 1.0 - s - t;
    multi_indices(p)
        .map(|(i, j, k)| trinomial(p, i, j, k) * l1.powi(i as i32) * s.powi(j as i32) * t.powi(k as i32))
        .collect()
}
