//! Local enhanced virtual element space of order `k ∈ {1, 2}` on one polygonal cell.
//!
//! Local dofs are ordered: vertex values, then (k = 2) edge-midpoint values with edge `i`
//! running from vertex `i` to vertex `i+1`, then (k = 2) the cell moment `(v, 1)_D`.

use nalgebra::{DMatrix, DVector};

use crate::basis::{monomial_index, poly_dim, ScaledMonomialBasis};
use crate::error::{Result, VemError};
use crate::geometry::{centroid, diameter, signed_area, Point2};
use crate::quadrature::{edge_quadrature, polygon_moments, polygon_quadrature, QuadratureRule};

/// Quadrature degree used for loads, interpolation and error integrals.
pub fn load_degree(k: usize) -> usize {
    2 * k + 4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub k: usize,
    pub n_vertices: usize,
}

impl DofLayout {
    pub fn new(k: usize, n_vertices: usize) -> Result<Self> {
        if !(1..=2).contains(&k) {
            return Err(VemError::Config(format!("order k = {k} is not supported (use 1 or 2)")));
        }
        Ok(Self { k, n_vertices })
    }

    pub fn n_dofs(&self) -> usize {
        match self.k {
            1 => self.n_vertices,
            _ => 2 * self.n_vertices + 1,
        }
    }

    /// Number of nodal dofs on the boundary of the cell.
    pub fn n_boundary_nodes(&self) -> usize {
        self.k * self.n_vertices
    }

    pub fn moment_dof(&self) -> Option<usize> {
        (self.k == 2).then_some(2 * self.n_vertices)
    }

    /// Boundary nodes in dof order: vertices, then edge midpoints for k = 2.
    pub fn nodes(&self, poly: &[Point2]) -> Vec<Point2> {
        let n = self.n_vertices;
        let mut out = poly.to_vec();
        if self.k == 2 {
            out.extend((0..n).map(|i| poly[i].midpoint(poly[(i + 1) % n])));
        }
        out
    }

    /// Local dofs carrying the trace on edge `i`, ordered start, (midpoint), end.
    pub fn edge_dofs(&self, i: usize) -> Vec<usize> {
        let n = self.n_vertices;
        match self.k {
            1 => vec![i, (i + 1) % n],
            _ => vec![i, n + i, (i + 1) % n],
        }
    }
}

/// Lagrange basis of the edge trace at parameter `t ∈ [0,1]`, same order as `edge_dofs`.
fn edge_shape(k: usize, t: f64) -> Vec<f64> {
    match k {
        1 => vec![1.0 - t, t],
        _ => vec![(1.0 - t) * (1.0 - 2.0 * t), 4.0 * t * (1.0 - t), t * (2.0 * t - 1.0)],
    }
}

/// Projectors and local matrices of one cell.
#[derive(Debug, Clone)]
pub struct LocalElement {
    pub layout: DofLayout,
    pub polygon: Vec<Point2>,
    pub basis: ScaledMonomialBasis,
    pub area: f64,
    /// `∫_D m_α` for `|α| <= 2k`.
    pub moments: Vec<f64>,
    /// Polynomial mass matrix `(m_α, m_β)_D`.
    pub poly_mass: DMatrix<f64>,
    /// Polynomial gradient Gram matrix `(∇m_α, ∇m_β)_D`.
    pub poly_stiffness: DMatrix<f64>,
    /// Dofs of the monomials, one column per monomial.
    pub dofs_of_basis: DMatrix<f64>,
    /// Coefficients of `Π¹ φ_j`, one column per local basis function.
    pub pi1: DMatrix<f64>,
    /// Coefficients of `Π⁰ φ_j`.
    pub pi0: DMatrix<f64>,
    /// Stabilized stiffness matrix.
    pub stiffness: DMatrix<f64>,
    /// `(Π⁰ v, Π⁰ w)_D`.
    pub mass: DMatrix<f64>,
    /// `v ↦ (v, 1)_D`.
    pub mean_row: DVector<f64>,
}

impl LocalElement {
    /// Builds the element of a counter-clockwise polygon. Errors carry `cell` for diagnostics.
    pub fn new(cell: usize, poly: &[Point2], k: usize) -> Result<Self> {
        let err = |msg: String| VemError::Element { cell, msg };
        let layout = DofLayout::new(k, poly.len())?;
        let area = signed_area(poly);
        if poly.len() < 3 || !(area > 0.0) {
            return Err(err("cell must be counter-clockwise with positive area".into()));
        }
        let n = poly.len();
        let nd = layout.n_dofs();
        let basis = ScaledMonomialBasis::new(centroid(poly), diameter(poly), k);
        let hd = basis.diameter;
        let np = poly_dim(k);
        let exps = basis.exponents().to_vec();
        let moments = polygon_moments(poly, basis.centroid, hd, 2 * k).map_err(|e| err(e.to_string()))?;
        let mom = |p: usize, q: usize| moments[monomial_index(p, q)];

        let poly_mass = DMatrix::from_fn(np, np, |a, b| mom(exps[a].0 + exps[b].0, exps[a].1 + exps[b].1));
        let poly_stiffness = DMatrix::from_fn(np, np, |a, b| {
            let ((pa, qa), (pb, qb)) = (exps[a], exps[b]);
            let mut s = 0.0;
            if pa > 0 && pb > 0 {
                s += (pa * pb) as f64 * mom(pa + pb - 2, qa + qb);
            }
            if qa > 0 && qb > 0 {
                s += (qa * qb) as f64 * mom(pa + pb, qa + qb - 2);
            }
            s / (hd * hd)
        });

        // (∇φ_j, ∇m_α) = -(φ_j, Δm_α) + ∮ φ_j ∂m_α/∂n, and the boundary integrals ∮ φ_j, ∮ m_α
        let mut b_grad = DMatrix::<f64>::zeros(np, nd);
        let mut bnd_int_dof = DVector::<f64>::zeros(nd);
        let mut bnd_int_mono = DVector::<f64>::zeros(np);
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let d = b - a;
            let len = d.norm();
            let normal = Point2::new(d.y / len, -d.x / len);
            let rule = edge_quadrature(a, b, 2 * k);
            let dofs = layout.edge_dofs(i);
            for (x, w) in rule.iter() {
                let t = (x - a).dot(d) / (len * len);
                let shape = edge_shape(k, t);
                let vals = basis.eval(x);
                let grads = basis.grad(x);
                for (&j, &s) in dofs.iter().zip(&shape) {
                    bnd_int_dof[j] += w * s;
                    for al in 0..np {
                        b_grad[(al, j)] += w * s * grads[al].dot(normal);
                    }
                }
                for al in 0..np {
                    bnd_int_mono[al] += w * vals[al];
                }
            }
        }
        if let Some(md) = layout.moment_dof() {
            // Laplacians of scaled monomials of degree <= 2 are constants
            let lap = basis.laplacian(basis.centroid);
            for al in 0..np {
                b_grad[(al, md)] -= lap[al];
            }
        }

        let gram = &poly_stiffness + &bnd_int_mono * bnd_int_mono.transpose();
        let rhs = &b_grad + &bnd_int_mono * bnd_int_dof.transpose();
        let chol = gram.clone().cholesky().ok_or_else(|| err("singular projection matrix (degenerate cell)".into()))?;
        let pi1 = chol.solve(&rhs);

        let nodes = layout.nodes(poly);
        let mut dofs_of_basis = DMatrix::<f64>::zeros(nd, np);
        for (r, &p) in nodes.iter().enumerate() {
            let v = basis.eval(p);
            for al in 0..np {
                dofs_of_basis[(r, al)] = v[al];
            }
        }
        if let Some(md) = layout.moment_dof() {
            for al in 0..np {
                dofs_of_basis[(md, al)] = moments[al];
            }
        }

        let mono_int = DVector::from_fn(np, |al, _| moments[al]);
        let mut pi0 = pi1.clone();
        if let Some(md) = layout.moment_dof() {
            // shift by the constant that restores the cell moment
            let proj_mean = mono_int.transpose() * &pi1;
            for j in 0..nd {
                let target = if j == md { 1.0 } else { 0.0 };
                pi0[(0, j)] += (target - proj_mean[j]) / area;
            }
        }
        let mean_row = (mono_int.transpose() * &pi0).transpose();

        let nb = layout.n_boundary_nodes();
        let resid = DMatrix::<f64>::identity(nd, nd) - &dofs_of_basis * &pi1;
        let x = resid.rows(0, nb);
        let stiffness = pi1.transpose() * &poly_stiffness * &pi1 + x.transpose() * x;
        let mass = pi0.transpose() * &poly_mass * &pi0;
        let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;

        Ok(Self {
            layout,
            polygon: poly.to_vec(),
            basis,
            area,
            moments,
            poly_mass,
            poly_stiffness,
            dofs_of_basis,
            pi1,
            pi0,
            stiffness: sym(stiffness),
            mass: sym(mass),
            mean_row,
        })
    }

    pub fn k(&self) -> usize {
        self.layout.k
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.n_dofs()
    }

    pub fn quadrature(&self) -> QuadratureRule {
        polygon_quadrature(&self.polygon, load_degree(self.k())).expect("element polygons are simple")
    }

    /// `(f, curl Π¹ψ_i)_D` for every local basis function `ψ_i`.
    pub fn load_curl(&self, f: &(dyn Fn(Point2) -> Point2 + Sync)) -> DVector<f64> {
        let g = self.integrate_vector(f, |gr| Point2::new(gr.y, -gr.x));
        self.pi1.transpose() * g
    }

    /// `(f, grad Π¹ψ_i)_D` for every local basis function `ψ_i`.
    pub fn load_grad(&self, f: &(dyn Fn(Point2) -> Point2 + Sync)) -> DVector<f64> {
        let g = self.integrate_vector(f, |gr| gr);
        self.pi1.transpose() * g
    }

    fn integrate_vector(&self, f: &(dyn Fn(Point2) -> Point2 + Sync), map: impl Fn(Point2) -> Point2) -> DVector<f64> {
        let np = self.basis.dim();
        let mut g = DVector::<f64>::zeros(np);
        for (x, w) in self.quadrature().iter() {
            let fx = f(x);
            for (al, gr) in self.basis.grad(x).into_iter().enumerate() {
                g[al] += w * fx.dot(map(gr));
            }
        }
        g
    }

    /// `(g, Π⁰ψ_i)_D` for a scalar function `g`.
    pub fn load_scalar(&self, g: &(dyn Fn(Point2) -> f64 + Sync)) -> DVector<f64> {
        let np = self.basis.dim();
        let mut m = DVector::<f64>::zeros(np);
        for (x, w) in self.quadrature().iter() {
            let gx = g(x);
            for (al, v) in self.basis.eval(x).into_iter().enumerate() {
                m[al] += w * gx * v;
            }
        }
        self.pi0.transpose() * m
    }

    /// `(q, Π⁰ψ_i)_D` for the polynomial `q` with coefficients `coeffs`.
    pub fn load_poly(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        self.pi0.transpose() * (&self.poly_mass * coeffs)
    }

    /// Dofs of the interpolant of `g`.
    pub fn interpolate(&self, g: &(dyn Fn(Point2) -> f64 + Sync)) -> DVector<f64> {
        let nodes = self.layout.nodes(&self.polygon);
        let mut v = DVector::<f64>::zeros(self.n_dofs());
        for (i, &p) in nodes.iter().enumerate() {
            v[i] = g(p);
        }
        if let Some(md) = self.layout.moment_dof() {
            v[md] = self.quadrature().integrate(g);
        }
        v
    }

    /// Dofs of the polynomial with the given coefficients.
    pub fn dofs_of_poly(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        &self.dofs_of_basis * coeffs
    }
}
