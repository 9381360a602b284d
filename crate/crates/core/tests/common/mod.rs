//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use quadcurl_vem::Point2;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Collapsed tensor Gauss rule with `n × n` points on a triangle; weights carry the sign of
/// its orientation.
pub fn triangle_rule(a: Point2, b: Point2, c: Point2, n: usize) -> Vec<(Point2, f64)> {
    let g = gauss_legendre(n);
    let jac = (b - a).cross(c - a);
    let mut out = Vec::new();
    for &(s, ws) in &g {
        for &(t, wt) in &g {
            // (s, t) on the square mapped to the triangle, Jacobian (1 - s)
            let (l1, l2) = (s, (1.0 - s) * t);
            let p = Point2::new(
                a.x + l1 * (b.x - a.x) + l2 * (c.x - a.x),
                a.y + l1 * (b.y - a.y) + l2 * (c.y - a.y),
            );
            out.push((p, ws * wt * (1.0 - s) * jac));
        }
    }
    out
}

/// Signed fan rule around `center`; exact for polynomials on any simple counter-clockwise
/// polygon.
pub fn fan_rule(poly: &[Point2], center: Point2, n: usize) -> Vec<(Point2, f64)> {
    let m = poly.len();
    (0..m).flat_map(|i| triangle_rule(center, poly[i], poly[(i + 1) % m], n)).collect()
}

pub fn integrate(rule: &[(Point2, f64)], f: impl Fn(Point2) -> f64) -> f64 {
    rule.iter().map(|&(p, w)| w * f(p)).sum()
}

pub fn vertex_mean(poly: &[Point2]) -> Point2 {
    let n = poly.len() as f64;
    let s = poly.iter().fold(Point2::new(0.0, 0.0), |acc, &p| acc + p);
    Point2::new(s.x / n, s.y / n)
}

/// Random counter-clockwise polygon with `n` vertices, star-shaped with respect to a random
/// centre, with angular gaps bounded away from zero.
pub fn random_polygon(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point2> {
    let mut gaps: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = gaps.iter().sum();
    for g in &mut gaps {
        *g *= 2.0 * std::f64::consts::PI / total;
    }
    let (cx, cy, scale) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(0.05..2.0));
    let mut angle: f64 = rng.random_range(0.0..1.0);
    let mut poly = Vec::with_capacity(n);
    for g in gaps {
        let r = scale * rng.random_range(0.6..1.0);
        poly.push(Point2::new(cx + r * angle.cos(), cy + r * angle.sin()));
        angle += g;
    }
    poly
}

/// Monomials `(x - c)^i (y - c)^j` of total degree at most `k`, with their derivatives.
pub struct Monomials {
    pub center: Point2,
    pub exps: Vec<(i32, i32)>,
}

impl Monomials {
    pub fn new(center: Point2, k: usize) -> Self {
        let mut exps = Vec::new();
        for d in 0..=k as i32 {
            for j in 0..=d {
                exps.push((d - j, j));
            }
        }
        Self { center, exps }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    fn pw(x: f64, e: i32) -> f64 {
        if e <= 0 {
            if e == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            x.powi(e)
        }
    }

    pub fn value(&self, a: usize, p: Point2) -> f64 {
        let (i, j) = self.exps[a];
        Self::pw(p.x - self.center.x, i) * Self::pw(p.y - self.center.y, j)
    }

    pub fn grad(&self, a: usize, p: Point2) -> Point2 {
        let (i, j) = self.exps[a];
        let (x, y) = (p.x - self.center.x, p.y - self.center.y);
        Point2::new(i as f64 * Self::pw(x, i - 1) * Self::pw(y, j), j as f64 * Self::pw(x, i) * Self::pw(y, j - 1))
    }

    pub fn laplacian(&self, a: usize, p: Point2) -> f64 {
        let (i, j) = self.exps[a];
        let (x, y) = (p.x - self.center.x, p.y - self.center.y);
        (i * (i - 1)) as f64 * Self::pw(x, i - 2) * Self::pw(y, j) + (j * (j - 1)) as f64 * Self::pw(x, i) * Self::pw(y, j - 2)
    }

    pub fn eval(&self, coeffs: &[f64], p: Point2) -> f64 {
        coeffs.iter().enumerate().map(|(a, c)| c * self.value(a, p)).sum()
    }
}

/// Trace of a dof vector on edge `e` at parameter `t`, using vertex values and (k = 2) the
/// midpoint value; dofs are ordered vertices, midpoints, moment.
pub fn trace(k: usize, n: usize, dofs: &[f64], e: usize, t: f64) -> f64 {
    let (a, b) = (dofs[e], dofs[(e + 1) % n]);
    if k == 1 {
        a * (1.0 - t) + b * t
    } else {
        let m = dofs[n + e];
        a * (1.0 - t) * (1.0 - 2.0 * t) + m * 4.0 * t * (1.0 - t) + b * t * (2.0 * t - 1.0)
    }
}

/// Π¹ and Π⁰ of a dof vector straight from their definitions, as coefficients in `Monomials`.
pub struct ProjectorOracle {
    pub mono: Monomials,
    pub pi1: Vec<f64>,
    pub pi0: Vec<f64>,
}

pub fn projector_oracle(poly: &[Point2], k: usize, dofs: &[f64]) -> ProjectorOracle {
    let n = poly.len();
    let center = vertex_mean(poly);
    let mono = Monomials::new(center, k);
    let nb = mono.len();
    let area_rule = fan_rule(poly, center, 8);
    let edge = gauss_legendre(8);
    let boundary_integral = |f: &dyn Fn(usize, f64, Point2) -> f64| -> f64 {
        let mut s = 0.0;
        for e in 0..n {
            let (p, q) = (poly[e], poly[(e + 1) % n]);
            let len = p.dist(q);
            for &(t, w) in &edge {
                let x = Point2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y));
                s += w * len * f(e, t, x);
            }
        }
        s
    };
    let bmean: Vec<f64> = (0..nb).map(|a| boundary_integral(&|_, _, x| mono.value(a, x))).collect();
    let vmean = boundary_integral(&|e, t, _| trace(k, n, dofs, e, t));
    let area = integrate(&area_rule, |_| 1.0);
    let cell_integral = if k == 2 { dofs[2 * n] } else { 0.0 };
    let mut g = nalgebra::DMatrix::<f64>::zeros(nb, nb);
    let mut rhs = nalgebra::DVector::<f64>::zeros(nb);
    for a in 0..nb {
        for b in 0..nb {
            g[(a, b)] = integrate(&area_rule, |p| mono.grad(a, p).dot(mono.grad(b, p))) + bmean[a] * bmean[b];
        }
        // Δ of a monomial of degree ≤ 2 is constant, so (v, Δq) only needs (v, 1)
        let lap = mono.laplacian(a, center);
        let flux = boundary_integral(&|e, t, x| {
            let (p, q) = (poly[e], poly[(e + 1) % n]);
            let d = q - p;
            let normal = Point2::new(d.y / d.norm(), -d.x / d.norm());
            trace(k, n, dofs, e, t) * mono.grad(a, x).dot(normal)
        });
        rhs[a] = -lap * cell_integral + flux + bmean[a] * vmean;
    }
    let pi1: Vec<f64> = g.lu().solve(&rhs).expect("oracle Gram matrix is singular").iter().copied().collect();
    let mut pi0 = pi1.clone();
    if k == 2 {
        let int_pi1 = integrate(&area_rule, |p| mono.eval(&pi1, p));
        pi0[0] += (cell_integral - int_pi1) / area;
    }
    ProjectorOracle { mono, pi1, pi0 }
}

/// Truncated Taylor series in one variable, used to differentiate closed forms exactly.
#[derive(Clone, Debug)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    /// `sin(a t)` expanded at `t0`, as normalized derivatives `f^(n)(t0) / n!`.
    pub fn sin_scaled(a: f64, t0: f64, order: usize) -> Self {
        let mut c = Vec::with_capacity(order + 1);
        let mut fact = 1.0;
        for n in 0..=order {
            if n > 0 {
                fact *= n as f64;
            }
            let d = a.powi(n as i32) * (a * t0 + n as f64 * std::f64::consts::FRAC_PI_2).sin();
            c.push(d / fact);
        }
        Jet(c)
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.0.len();
        Jet((0..n).map(|i| (0..=i).map(|j| self.0[j] * other.0[i - j]).sum()).collect())
    }

    /// The `n`-th derivative at the expansion point.
    pub fn derivative(&self, n: usize) -> f64 {
        let fact: f64 = (1..=n).map(|i| i as f64).product();
        self.0[n] * fact
    }
}
