//! Bivariate polynomials in a scaled monomial basis.
//!
//! `F(x, y) = Σ c[a, b] X^a Y^b` with `X = (x - ox) / h`, `Y = (y - oy) / h`.
//! The local frame keeps monomials of order one near the region of
//! interest, which matters for the conditioning of shape-function fits.
//! Coefficients for total degree `d` are stored b-major, i.e. in the same
//! layout as a triangular control net (`a` plays the role of `j`).

use crate::net::{net_index, net_len};
use crate::point::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: Point,
    pub scale: f64,
}

impl Frame {
    pub const UNIT: Frame = Frame { origin: Point::new(0.0, 0.0), scale: 1.0 };

    pub fn new(origin: Point, scale: f64) -> Self {
        assert!(scale > 0.0 && scale.is_finite(), "frame scale must be positive");
        Self { origin, scale }
    }

    /// Frame centered at the centroid of `points` with the largest distance
    /// from it as unit length.
    pub fn fitted(points: &[Point]) -> Self {
        let n = points.len() as f64;
        let c = points.iter().fold(Point::default(), |acc, p| acc + *p) * (1.0 / n);
        let r = points.iter().map(|p| p.distance(c)).fold(0.0, f64::max);
        Self::new(c, if r > 0.0 { r } else { 1.0 })
    }

    #[inline]
    pub fn local(&self, p: Point) -> (f64, f64) {
        ((p.x - self.origin.x) / self.scale, (p.y - self.origin.y) / self.scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BivariatePolynomial {
    degree: usize,
    frame: Frame,
    coeffs: Vec<f64>,
}

/// All monomial powers `X^a Y^b` with `a + b <= d`, in storage order.
pub fn monomial_values(d: usize, x: f64, y: f64, out: &mut Vec<f64>) {
    out.clear();
    let mut ypow = 1.0;
    for b in 0..=d {
        let mut v = ypow;
        for _ in 0..=d - b {
            out.push(v);
            v *= x;
        }
        ypow *= y;
    }
}

impl BivariatePolynomial {
    pub fn new(degree: usize, frame: Frame, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), net_len(degree), "coefficient count does not match degree");
        Self { degree, frame, coeffs }
    }

    pub fn zero(frame: Frame) -> Self {
        Self::new(0, frame, vec![0.0])
    }

    pub fn constant(c: f64) -> Self {
        Self::new(0, Frame::UNIT, vec![c])
    }

    /// `x^a y^b` in global coordinates.
    pub fn monomial(a: usize, b: usize) -> Self {
        let d = a + b;
        let mut coeffs = vec![0.0; net_len(d)];
        coeffs[net_index(a, b, d)] = 1.0;
        Self::new(d, Frame::UNIT, coeffs)
    }

    /// Build from global-coordinate coefficients `c[(a, b)]`.
    pub fn from_terms(terms: &[((usize, usize), f64)]) -> Self {
        let d = terms.iter().map(|((a, b), _)| a + b).max().unwrap_or(0);
        let mut coeffs = vec![0.0; net_len(d)];
        for &((a, b), c) in terms {
            coeffs[net_index(a, b, d)] += c;
        }
        Self::new(d, Frame::UNIT, coeffs)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `X^a Y^b` (zero beyond the stored degree).
    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.degree { 0.0 } else { self.coeffs[net_index(a, b, self.degree)] }
    }

    pub fn eval(&self, p: Point) -> f64 {
        let (x, y) = self.frame.local(p);
        // Horner in X inside Horner in Y.
        let d = self.degree;
        let mut acc = 0.0;
        for b in (0..=d).rev() {
            let mut row = 0.0;
            for a in (0..=d - b).rev() {
                row = row * x + self.coeffs[net_index(a, b, d)];
            }
            acc = acc * y + row;
        }
        acc
    }

    fn with_degree(&self, d: usize) -> Self {
        if d == self.degree {
            return self.clone();
        }
        let mut coeffs = vec![0.0; net_len(d)];
        for b in 0..=self.degree {
            for a in 0..=self.degree - b {
                coeffs[net_index(a, b, d)] = self.coeff(a, b);
            }
        }
        Self::new(d, self.frame, coeffs)
    }

    /// The same polynomial written in another frame.
    pub fn reframed(&self, frame: Frame) -> Self {
        if frame == self.frame {
            return self.clone();
        }
        // X_old = r X_new + u, Y_old = r Y_new + v
        let r = frame.scale / self.frame.scale;
        let u = (frame.origin.x - self.frame.origin.x) / self.frame.scale;
        let v = (frame.origin.y - self.frame.origin.y) / self.frame.scale;
        let d = self.degree;
        let binom = binomials(d);
        let mut coeffs = vec![0.0; net_len(d)];
        for b in 0..=d {
            for a in 0..=d - b {
                let c = self.coeffs[net_index(a, b, d)];
                if c == 0.0 {
                    continue;
                }
                for i in 0..=a {
                    let xa = binom[a][i] * r.powi(i as i32) * u.powi((a - i) as i32);
                    for j in 0..=b {
                        let yb = binom[b][j] * r.powi(j as i32) * v.powi((b - j) as i32);
                        coeffs[net_index(i, j, d)] += c * xa * yb;
                    }
                }
            }
        }
        Self::new(d, frame, coeffs)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.degree, self.frame, self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Sum, expressed in `self`'s frame.
    pub fn add(&self, other: &Self) -> Self {
        let o = other.reframed(self.frame);
        let d = self.degree.max(o.degree);
        let mut out = self.with_degree(d);
        let o = o.with_degree(d);
        for (c, x) in out.coeffs.iter_mut().zip(&o.coeffs) {
            *c += x;
        }
        out
    }

    /// Product, expressed in `self`'s frame.
    pub fn mul(&self, other: &Self) -> Self {
        let o = other.reframed(self.frame);
        let d = self.degree + o.degree;
        let mut coeffs = vec![0.0; net_len(d)];
        for b0 in 0..=self.degree {
            for a0 in 0..=self.degree - b0 {
                let c0 = self.coeffs[net_index(a0, b0, self.degree)];
                if c0 == 0.0 {
                    continue;
                }
                for b1 in 0..=o.degree {
                    for a1 in 0..=o.degree - b1 {
                        coeffs[net_index(a0 + a1, b0 + b1, d)] += c0 * o.coeffs[net_index(a1, b1, o.degree)];
                    }
                }
            }
        }
        Self::new(d, self.frame, coeffs)
    }

    /// `F(x - c.x, y - c.y)`.
    pub fn translated(&self, c: Point) -> Self {
        let frame = Frame::new(self.frame.origin + c, self.frame.scale);
        Self { degree: self.degree, frame, coeffs: self.coeffs.clone() }
    }

    /// An antiderivative `P` in `x` (`∂P/∂x = F`), by coefficient shift.
    pub fn antiderivative_x(&self) -> Self {
        let d = self.degree + 1;
        let h = self.frame.scale;
        let mut coeffs = vec![0.0; net_len(d)];
        for b in 0..=self.degree {
            for a in 0..=self.degree - b {
                coeffs[net_index(a + 1, b, d)] = self.coeffs[net_index(a, b, self.degree)] * h / (a + 1) as f64;
            }
        }
        Self::new(d, self.frame, coeffs)
    }

    /// An antiderivative in `y`.
    pub fn antiderivative_y(&self) -> Self {
        let d = self.degree + 1;
        let h = self.frame.scale;
        let mut coeffs = vec![0.0; net_len(d)];
        for b in 0..=self.degree {
            for a in 0..=self.degree - b {
                coeffs[net_index(a, b + 1, d)] = self.coeffs[net_index(a, b, self.degree)] * h / (b + 1) as f64;
            }
        }
        Self::new(d, self.frame, coeffs)
    }
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![1.0; i + 1];
        for k in 1..i {
            row[k] = prev[k - 1] + prev[k];
        }
        rows.push(row);
    }
    rows
}
