//! Structured meshes of a square and of the unit disc.

use std::f64::consts::{FRAC_PI_3, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::mesh::CurvedMesh;
use crate::net;
use crate::point::Point;
use crate::triangle::StandardNodes;

/// Side length of the donor square, centred at the origin.
pub const SQUARE_WIDTH: f64 = 17.0 / 8.0;
/// Orientation of the disc's hexagonal lattice, chosen so that its edges
/// do not line up with the square grid.
pub const DISC_ROTATION: f64 = 0.3;
/// Interior vertices move by at most this fraction of the lattice spacing.
pub const JITTER_FRACTION: f64 = 0.15;

/// Reproducible pseudo-random offset for a vertex, keyed by its position so
/// that every element sharing the vertex sees the same displacement.
fn jitter_offset(seed: u64, p: Point, radius: f64) -> Point {
    let qx = (p.x * 1e9).round() as i64 as u64;
    let qy = (p.y * 1e9).round() as i64 as u64;
    let key = splitmix(seed ^ splitmix(qx ^ splitmix(qy)));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let r = radius * rng.gen::<f64>().sqrt();
    let a = rng.gen::<f64>() * TAU;
    Point::new(r * a.cos(), r * a.sin())
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `n x n` grid on the square of width 17/8, each cell cut along its
/// diagonal; `2 n^2` straight-sided elements of degree `p`.
pub fn square_mesh(p: usize, n: usize, jitter_seed: Option<u64>) -> Result<CurvedMesh> {
    assert!(n >= 1);
    let h = SQUARE_WIDTH / n as f64;
    let lo = -0.5 * SQUARE_WIDTH;
    let vertex = |i: usize, j: usize| {
        let v = Point::new(lo + i as f64 * h, lo + j as f64 * h);
        match jitter_seed {
            Some(seed) if i > 0 && j > 0 && i < n && j < n => v + jitter_offset(seed, v, JITTER_FRACTION * h),
            _ => v,
        }
    };
    let mut nodes = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1), vertex(i, j + 1));
            nodes.push(StandardNodes::affine(p, [a, b, c]));
            nodes.push(StandardNodes::affine(p, [a, c, d]));
        }
    }
    CurvedMesh::from_nodes(p, nodes)
}

/// Unit-disc mesh with `6 n^2` elements built from a hexagonal lattice.
///
/// Lattice points are pushed radially so the hexagon maps onto the circle.
/// Elements with an edge on the boundary carry degree-`p` nodes on the
/// circle, spaced evenly in angle; all other nodes are affine in the
/// element's corners.
pub fn disc_mesh(p: usize, n: usize, jitter_seed: Option<u64>) -> Result<CurvedMesh> {
    assert!(n >= 1);
    let hex: Vec<Point> = (0..6)
        .map(|k| {
            let a = DISC_ROTATION + k as f64 * FRAC_PI_3;
            Point::new(a.cos(), a.sin())
        })
        .collect();
    let spacing = 1.0 / n as f64;
    let vertex = |k: usize, a: usize, b: usize| -> Point {
        if a + b == 0 {
            return Point::default();
        }
        let raw = (hex[k] * a as f64 + hex[(k + 1) % 6] * b as f64) * spacing;
        let v = raw * ((a + b) as f64 * spacing / raw.norm());
        match jitter_seed {
            Some(seed) if a + b < n => v + jitter_offset(seed, v, JITTER_FRACTION * spacing),
            _ => v,
        }
    };
    let lattice = net::lattice(p);
    let mut nodes = Vec::with_capacity(6 * n * n);
    for k in 0..6 {
        for b in 0..n {
            for a in 0..n - b {
                let up = [vertex(k, a, b), vertex(k, a + 1, b), vertex(k, a, b + 1)];
                if a + b + 1 == n {
                    nodes.push(boundary_element(p, up, &lattice));
                } else {
                    nodes.push(StandardNodes::affine(p, up));
                }
                if a + b + 2 <= n {
                    let down = [vertex(k, a + 1, b), vertex(k, a + 1, b + 1), vertex(k, a, b + 1)];
                    nodes.push(StandardNodes::affine(p, down));
                }
            }
        }
    }
    CurvedMesh::from_nodes(p, nodes)
}

/// Element whose hypotenuse (corner 1 to corner 2) lies on the unit circle.
fn boundary_element(p: usize, c: [Point; 3], lattice: &[(f64, f64)]) -> StandardNodes {
    let a1 = c[1].y.atan2(c[1].x);
    let mut da = c[2].y.atan2(c[2].x) - a1;
    if da > std::f64::consts::PI {
        da -= TAU;
    } else if da < -std::f64::consts::PI {
        da += TAU;
    }
    let pts = net::multi_indices(p)
        .zip(lattice)
        .map(|((i, _, k), &(s, t))| {
            if i == 0 {
                let ang = a1 + da * boundary_fraction(p, k, da);
                Point::new(ang.cos(), ang.sin())
            } else {
                c[0] * (1.0 - s - t) + c[1] * s + c[2] * t
            }
        })
        .collect();
    StandardNodes::new(p, pts).expect("lattice size matches degree")
}

/// Angular position, as a fraction of the element's arc `da`, of boundary
/// node `k`. Evenly spaced except for cubics, whose two inner nodes are
/// pulled slightly towards the arc midpoint: that cancels the leading term of
/// the enclosed-area error, which then falls as `h^6` instead of `h^4`.
fn boundary_fraction(p: usize, k: usize, da: f64) -> f64 {
    let even = k as f64 / p as f64;
    if p != 3 || k == 0 || k == 3 {
        return even;
    }
    let shift = da * da / 648.0;
    if k == 1 { even + shift } else { even - shift }
}
