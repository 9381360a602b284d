//! Scaled monomials `m_α(x) = ((x - x_D)/h_D)^α` on a cell.

use crate::geometry::Point2;

/// Exponents `(p, q)` of all monomials of total degree `<= degree`, graded, with `p`
/// descending inside each degree: `1, x, y, x², xy, y², ...`.
pub fn monomial_exponents(degree: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
    for d in 0..=degree {
        for q in 0..=d {
            out.push((d - q, q));
        }
    }
    out
}

/// Position of `x^p y^q` in the graded order.
#[inline]
pub fn monomial_index(p: usize, q: usize) -> usize {
    let d = p + q;
    d * (d + 1) / 2 + q
}

#[inline]
pub fn poly_dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

#[inline]
fn ipow(x: f64, n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        2 => x * x,
        _ => x.powi(n as i32),
    }
}

#[derive(Debug, Clone)]
pub struct ScaledMonomialBasis {
    pub centroid: Point2,
    pub diameter: f64,
    pub degree: usize,
    exps: Vec<(usize, usize)>,
}

impl ScaledMonomialBasis {
    pub fn new(centroid: Point2, diameter: f64, degree: usize) -> Self {
        Self { centroid, diameter, degree, exps: monomial_exponents(degree) }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exps
    }

    #[inline]
    fn local(&self, p: Point2) -> (f64, f64) {
        ((p.x - self.centroid.x) / self.diameter, (p.y - self.centroid.y) / self.diameter)
    }

    pub fn eval(&self, p: Point2) -> Vec<f64> {
        let (x, y) = self.local(p);
        self.exps.iter().map(|&(a, b)| ipow(x, a) * ipow(y, b)).collect()
    }

    /// Gradients of every basis function at `p`.
    pub fn grad(&self, p: Point2) -> Vec<Point2> {
        let (x, y) = self.local(p);
        let h = self.diameter;
        self.exps
            .iter()
            .map(|&(a, b)| {
                let gx = if a > 0 { a as f64 * ipow(x, a - 1) * ipow(y, b) / h } else { 0.0 };
                let gy = if b > 0 { b as f64 * ipow(x, a) * ipow(y, b - 1) / h } else { 0.0 };
                Point2::new(gx, gy)
            })
            .collect()
    }

    /// Laplacians of every basis function at `p`.
    pub fn laplacian(&self, p: Point2) -> Vec<f64> {
        let (x, y) = self.local(p);
        let h2 = self.diameter * self.diameter;
        self.exps
            .iter()
            .map(|&(a, b)| {
                let lx = if a > 1 { (a * (a - 1)) as f64 * ipow(x, a - 2) * ipow(y, b) } else { 0.0 };
                let ly = if b > 1 { (b * (b - 1)) as f64 * ipow(x, a) * ipow(y, b - 2) } else { 0.0 };
                (lx + ly) / h2
            })
            .collect()
    }

    pub fn value(&self, coeffs: &[f64], p: Point2) -> f64 {
        self.eval(p).iter().zip(coeffs).map(|(m, c)| m * c).sum()
    }

    pub fn gradient(&self, coeffs: &[f64], p: Point2) -> Point2 {
        self.grad(p).iter().zip(coeffs).fold(Point2::default(), |acc, (g, &c)| acc + c * *g)
    }

    /// Vector curl `(∂/∂y, -∂/∂x)` of the polynomial with the given coefficients.
    pub fn curl(&self, coeffs: &[f64], p: Point2) -> Point2 {
        let g = self.gradient(coeffs, p);
        Point2::new(g.y, -g.x)
    }

    /// Coefficients (in this basis) of a global polynomial given as a closure on points, by
    /// interpolating in `dim()` well-spread sample points. Exact when `f` is in the space.
    pub fn fit(&self, f: impl Fn(Point2) -> f64) -> Vec<f64> {
        let n = self.dim();
        let samples: Vec<Point2> = (0..n)
            .map(|i| {
                let t = 0.37 + 1.13 * i as f64;
                let r = 0.2 + 0.05 * i as f64;
                self.centroid + (r * self.diameter) * Point2::new(t.cos(), (1.7 * t).sin())
            })
            .collect();
        let a = nalgebra::DMatrix::from_fn(n, n, |i, j| self.eval(samples[i])[j]);
        let b = nalgebra::DVector::from_fn(n, |i, _| f(samples[i]));
        let x = a.lu().solve(&b).expect("sample points are unisolvent");
        x.iter().copied().collect()
    }
}
