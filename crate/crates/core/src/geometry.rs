//! Planar points and polygon primitives shared by the mesh and element code.

use std::ops::{Add, Mul, Sub};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, other: Self) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn midpoint(self, other: Self) -> Self {
        Self::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Lexicographic comparison (x first, then y).
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.x.total_cmp(&other.x).then(self.y.total_cmp(&other.y))
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    #[inline]
    fn mul(self, rhs: Point2) -> Point2 {
        Point2::new(self * rhs.x, self * rhs.y)
    }
}

/// Shoelace signed area; positive for counter-clockwise loops.
pub fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        a += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * a
}

/// Area centroid of a simple polygon.
pub fn centroid(poly: &[Point2]) -> Point2 {
    let n = poly.len();
    // shift to the first vertex to limit cancellation
    let o = poly[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = poly[i] - o;
        let q = poly[(i + 1) % n] - o;
        let w = p.cross(q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    a *= 0.5;
    Point2::new(o.x + cx / (6.0 * a), o.y + cy / (6.0 * a))
}

/// Maximum distance between two vertices.
pub fn diameter(poly: &[Point2]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..poly.len() {
        for j in i + 1..poly.len() {
            d = d.max(poly[i].dist(poly[j]));
        }
    }
    d
}

/// Even-odd point-in-polygon test; points on the boundary (within `tol`) count as inside.
pub fn point_in_polygon(p: Point2, poly: &[Point2], tol: f64) -> bool {
    let n = poly.len();
    for i in 0..n {
        if point_segment_distance(p, poly[i], poly[(i + 1) % n]) <= tol {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < xc {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + t * ab)
}

/// Intersection of the closed segments `p0p1` and `q0q1` if they cross at a single point.
pub fn segment_intersection(p0: Point2, p1: Point2, q0: Point2, q1: Point2) -> Option<(f64, f64, Point2)> {
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = r.cross(s);
    if denom.abs() <= 1e-300 {
        return None;
    }
    let t = (q0 - p0).cross(s) / denom;
    let u = (q0 - p0).cross(r) / denom;
    Some((t, u, p0 + t * r))
}

/// True if consecutive edges never cross each other (O(n²) check).
pub fn is_simple(poly: &[Point2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a0, a1) = (poly[i], poly[(i + 1) % n]);
        for j in i + 1..n {
            // skip adjacent edges
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (b0, b1) = (poly[j], poly[(j + 1) % n]);
            if let Some((t, u, _)) = segment_intersection(a0, a1, b0, b1) {
                let eps = 1e-12;
                if t > eps && t < 1.0 - eps && u > eps && u < 1.0 - eps {
                    return false;
                }
            }
        }
    }
    true
}

/// Convex polygon test for a counter-clockwise loop; collinear vertices are allowed.
pub fn is_convex(poly: &[Point2]) -> bool {
    let n = poly.len();
    let scale = diameter(poly).powi(2);
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        (b - a).cross(c - b) >= -1e-12 * scale
    })
}

/// Half-plane `{p : n·p <= c}`.
#[derive(Debug, Clone, Copy)]
pub struct HalfPlane {
    pub normal: Point2,
    pub offset: f64,
}

impl HalfPlane {
    pub fn new(normal: Point2, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// Half-plane to the left of the directed line `a -> b`.
    pub fn left_of(a: Point2, b: Point2) -> Self {
        let d = b - a;
        let normal = Point2::new(d.y, -d.x);
        Self::new(normal, normal.dot(a))
    }

    #[inline]
    pub fn eval(&self, p: Point2) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn flipped(&self) -> Self {
        Self::new(Point2::new(-self.normal.x, -self.normal.y), -self.offset)
    }
}

/// Sutherland–Hodgman clip of a convex polygon against a half-plane.
pub fn clip_half_plane(poly: &[Point2], hp: &HalfPlane) -> Vec<Point2> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let (fa, fb) = (hp.eval(a), hp.eval(b));
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            // canonical endpoint order so neighbouring cells produce identical points
            let (p, q, fp, fq) = if a.lex_cmp(&b).is_lt() { (a, b, fa, fb) } else { (b, a, fb, fa) };
            let t = fp / (fp - fq);
            out.push(p + t * (q - p));
        }
    }
    out
}
