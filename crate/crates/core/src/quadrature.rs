//! Gauss–Legendre rules on intervals and exact-degree rules on the unit triangle.

use std::sync::OnceLock;

const CACHED_RULES: usize = 96;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`, exact for degree `2n - 1`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn compute(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared rule with `n` nodes.
    pub fn get(n: usize) -> &'static GaussLegendre {
        static RULES: [OnceLock<GaussLegendre>; CACHED_RULES] = [const { OnceLock::new() }; CACHED_RULES];
        assert!(n >= 1 && n <= CACHED_RULES, "unsupported Gauss rule size {n}");
        RULES[n - 1].get_or_init(|| GaussLegendre::compute(n))
    }

    /// Fewest nodes integrating polynomials of `degree` exactly.
    pub fn for_degree(degree: usize) -> &'static GaussLegendre {
        Self::get(degree / 2 + 1)
    }

    /// Nodes and weights mapped onto `[0, 1]`.
    pub fn unit_interval(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(mid + half * x)).sum::<f64>()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature rule on `U = {s, t >= 0, s + t <= 1}`; weights sum to 1/2.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub degree: usize,
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// A rule exact for all bivariate polynomials of total degree `degree`.
    ///
    /// Degrees 0–2 use the classical symmetric one- and three-point rules;
    /// higher degrees use a collapsed-coordinate tensor Gauss rule.
    pub fn for_degree(degree: usize) -> &'static TriangleRule {
        static RULES: [OnceLock<TriangleRule>; CACHED_RULES] = [const { OnceLock::new() }; CACHED_RULES];
        assert!(degree < CACHED_RULES, "unsupported triangle rule degree {degree}");
        RULES[degree].get_or_init(|| TriangleRule::build(degree))
    }

    fn build(degree: usize) -> Self {
        match degree {
            0 | 1 => Self { degree, points: vec![(1.0 / 3.0, 1.0 / 3.0)], weights: vec![0.5] },
            2 => Self {
                degree,
                points: vec![(1.0 / 6.0, 1.0 / 6.0), (2.0 / 3.0, 1.0 / 6.0), (1.0 / 6.0, 2.0 / 3.0)],
                weights: vec![1.0 / 6.0; 3],
            },
            _ => Self::collapsed(degree),
        }
    }

    /// Duffy map `s = u, t = v (1 - u)` with Jacobian `1 - u`.
    pub fn collapsed(degree: usize) -> Self {
        let gu = GaussLegendre::for_degree(degree + 1);
        let gv = GaussLegendre::for_degree(degree);
        let mut points = Vec::with_capacity(gu.nodes.len() * gv.nodes.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for (u, wu) in gu.unit_interval() {
            for (v, wv) in gv.unit_interval() {
                points.push((u, v * (1.0 - u)));
                weights.push(wu * wv * (1.0 - u));
            }
        }
        Self { degree, points, weights }
    }

    pub fn iter(&self) -> impl Iterator<Item = ((f64, f64), f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.iter().map(|((s, t), w)| w * f(s, t)).sum()
    }
}
