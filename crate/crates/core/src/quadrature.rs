//! Exact polygon moments and numerical quadrature on edges, triangles and polygons.

use crate::error::{Result, VemError};
use crate::geometry::{centroid, is_simple, signed_area, Point2};
use crate::basis::monomial_exponents;

/// Points and weights of a quadrature rule. Weights carry the measure of the region
/// (area for polygons, arc length for edges).
#[derive(Debug, Clone, Default)]
pub struct QuadratureRule {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point2) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point2, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]` with `n` points (exact to degree `2n-1`).
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess, refined by Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 1.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = 0.5 * (1.0 - z);
        nodes[n - 1 - i] = 0.5 * (1.0 + z);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss rule along the segment `p0 -> p1`, exact for polynomials of `degree` in arc length.
pub fn edge_quadrature(p0: Point2, p1: Point2, degree: usize) -> QuadratureRule {
    let n = (degree + 2) / 2;
    let (t, w) = gauss_legendre_01(n.max(1));
    let len = p0.dist(p1);
    QuadratureRule {
        points: t.iter().map(|&s| p0 + s * (p1 - p0)).collect(),
        weights: w.iter().map(|&wi| wi * len).collect(),
    }
}

/// Collapsed-coordinate Gauss rule on a triangle, exact to `degree`.
pub fn triangle_quadrature(a: Point2, b: Point2, c: Point2, degree: usize) -> QuadratureRule {
    let n = (degree + 3) / 2;
    let (t, w) = gauss_legendre_01(n);
    let area2 = (b - a).cross(c - a).abs();
    let mut rule = QuadratureRule {
        points: Vec::with_capacity(n * n),
        weights: Vec::with_capacity(n * n),
    };
    for (&u, &wu) in t.iter().zip(&w) {
        for (&v, &wv) in t.iter().zip(&w) {
            let xi = u;
            let eta = v * (1.0 - u);
            rule.points.push(a + xi * (b - a) + eta * (c - a));
            rule.weights.push(area2 * wu * wv * (1.0 - u));
        }
    }
    rule
}

/// Triangulation of a simple counter-clockwise polygon: a fan from the centroid when the
/// polygon is star-shaped about it, otherwise ear clipping.
pub fn triangulate(poly: &[Point2]) -> Result<Vec<[Point2; 3]>> {
    let n = poly.len();
    let area = signed_area(poly);
    if n < 3 || area <= 0.0 {
        return Err(VemError::Geometry("polygon must be counter-clockwise with positive area".into()));
    }
    let c = centroid(poly);
    let fan_ok = (0..n).all(|i| (poly[i] - c).cross(poly[(i + 1) % n] - c) > 1e-14 * area);
    if fan_ok {
        return Ok((0..n).map(|i| [c, poly[i], poly[(i + 1) % n]]).collect());
    }
    ear_clip(poly)
}

fn ear_clip(poly: &[Point2]) -> Result<Vec<[Point2; 3]>> {
    if !is_simple(poly) {
        return Err(VemError::Geometry("self-intersecting polygon".into()));
    }
    let scale = signed_area(poly).abs();
    let mut idx: Vec<usize> = (0..poly.len()).collect();
    let mut tris = Vec::with_capacity(poly.len() - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            if (b - a).cross(c - b) <= 1e-14 * scale {
                continue;
            }
            let contains_other = idx.iter().any(|&j| {
                if j == ia || j == ib || j == ic {
                    return false;
                }
                let p = poly[j];
                (b - a).cross(p - a) >= 0.0 && (c - b).cross(p - b) >= 0.0 && (a - c).cross(p - c) >= 0.0
            });
            if contains_other {
                continue;
            }
            tris.push([a, b, c]);
            idx.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            return Err(VemError::Geometry("ear clipping failed".into()));
        }
    }
    tris.push([poly[idx[0]], poly[idx[1]], poly[idx[2]]]);
    Ok(tris)
}

/// Quadrature on a polygon exact for polynomials of `degree` (at most 10).
pub fn polygon_quadrature(poly: &[Point2], degree: usize) -> Result<QuadratureRule> {
    if degree > 10 {
        return Err(VemError::Geometry(format!("quadrature degree {degree} exceeds 10")));
    }
    let tris = triangulate(poly)?;
    let mut rule = QuadratureRule::default();
    for [a, b, c] in tris {
        let t = triangle_quadrature(a, b, c, degree);
        rule.points.extend(t.points);
        rule.weights.extend(t.weights);
    }
    Ok(rule)
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Exact moments `∫_D ((x - center)/scale)^α dx` for all `|α| <= max_degree`, in the graded
/// monomial order of [`monomial_exponents`].
///
/// Uses `∫_D X^p Y^q = 1/(p+1) ∮ X^{p+1} Y^q dY` with a closed-form binomial expansion per edge.
pub fn polygon_moments(poly: &[Point2], center: Point2, scale: f64, max_degree: usize) -> Result<Vec<f64>> {
    if poly.len() < 3 || !is_simple(poly) {
        return Err(VemError::Geometry("moments need a simple polygon".into()));
    }
    let local: Vec<Point2> = poly.iter().map(|&p| (1.0 / scale) * (p - center)).collect();
    let exps = monomial_exponents(max_degree);
    let n = local.len();
    let jac = scale * scale;
    let mut out = Vec::with_capacity(exps.len());
    for &(p, q) in &exps {
        let mut total = 0.0;
        for e in 0..n {
            let a = local[e];
            let d = local[(e + 1) % n] - a;
            if d.y == 0.0 {
                continue;
            }
            // ∫_0^1 (a.x + t d.x)^{p+1} (a.y + t d.y)^q dt
            let mut s = 0.0;
            for i in 0..=p + 1 {
                let ci = binomial(p + 1, i) * a.x.powi((p + 1 - i) as i32) * d.x.powi(i as i32);
                if ci == 0.0 {
                    continue;
                }
                for j in 0..=q {
                    let cj = binomial(q, j) * a.y.powi((q - j) as i32) * d.y.powi(j as i32);
                    s += ci * cj / (i + j + 1) as f64;
                }
            }
            total += s * d.y;
        }
        out.push(jac * total / (p + 1) as f64);
    }
    Ok(out)
}
