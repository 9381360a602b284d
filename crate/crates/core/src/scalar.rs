//! Global virtual element spaces: dof numbering, assembly, boundary conditions and the two
//! scalar model solvers (Dirichlet, and Neumann with a mean term).

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::element::LocalElement;
use crate::error::{Result, VemError};
use crate::geometry::Point2;
use crate::mesh::PolygonMesh;
use crate::sparse::{SparseMatrix, SparseSolver};

pub type ScalarFn = dyn Fn(Point2) -> f64 + Sync;
pub type VectorFn = dyn Fn(Point2) -> Point2 + Sync;

/// Global dof numbering: vertices (mesh order), edge midpoints (edge order, k = 2), cell
/// moments (cell order, k = 2).
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub k: usize,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_cells: usize,
    pub cell_dofs: Vec<Vec<usize>>,
    /// Boundary loop label of every dof, `None` for interior dofs.
    pub boundary_label: Vec<Option<usize>>,
    /// Location of nodal dofs; `None` for cell moments.
    pub node: Vec<Option<Point2>>,
}

impl DofMap {
    pub fn new(mesh: &PolygonMesh, k: usize) -> Result<Self> {
        if !(1..=2).contains(&k) {
            return Err(VemError::Config(format!("order k = {k} is not supported (use 1 or 2)")));
        }
        let topo = mesh.topology()?;
        let nv = mesh.n_vertices();
        let ne = topo.n_edges();
        let nc = mesh.n_cells();
        let n = if k == 1 { nv } else { nv + ne + nc };
        let vlabels = mesh.vertex_loop_labels();
        let mut boundary_label = vec![None; n];
        let mut node = vec![None; n];
        for v in 0..nv {
            boundary_label[v] = vlabels[v];
            node[v] = Some(mesh.vertices[v]);
        }
        let cell_dofs = mesh
            .cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let mut d = cell.clone();
                if k == 2 {
                    d.extend(topo.cell_edges[c].iter().map(|&e| nv + e));
                    d.push(nv + ne + c);
                }
                d
            })
            .collect();
        if k == 2 {
            for (e, edge) in topo.edges.iter().enumerate() {
                node[nv + e] = Some(mesh.vertices[edge.v0].midpoint(mesh.vertices[edge.v1]));
                if edge.is_boundary() {
                    boundary_label[nv + e] = vlabels[edge.v0];
                }
            }
        }
        Ok(Self { k, n_vertices: nv, n_edges: ne, n_cells: nc, cell_dofs, boundary_label, node })
    }

    pub fn n_dofs(&self) -> usize {
        self.boundary_label.len()
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary_label[i].is_some()
    }

    /// Interior dofs in increasing order (the unknowns of the zero-trace space).
    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&i| !self.is_boundary(i)).collect()
    }
}

/// A mesh with its dof map and all local elements of order `k`.
#[derive(Debug)]
pub struct VemSpace {
    pub mesh: PolygonMesh,
    pub k: usize,
    pub dofs: DofMap,
    pub elements: Vec<LocalElement>,
}

impl VemSpace {
    pub fn new(mesh: PolygonMesh, k: usize) -> Result<Arc<Self>> {
        let dofs = DofMap::new(&mesh, k)?;
        let elements = (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| LocalElement::new(c, &mesh.cell_polygon(c), k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(Self { mesh, k, dofs, elements }))
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs()
    }

    pub(crate) fn local(&self, c: usize, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.dofs.cell_dofs[c].len(), self.dofs.cell_dofs[c].iter().map(|&g| v[g]))
    }

    /// The functional `v ↦ (v, 1)_Ω` as a vector.
    pub fn mean_vector(&self) -> DVector<f64> {
        let mut m = DVector::zeros(self.n_dofs());
        for (c, e) in self.elements.iter().enumerate() {
            for (l, &g) in self.dofs.cell_dofs[c].iter().enumerate() {
                m[g] += e.mean_row[l];
            }
        }
        m
    }

    /// `c_stiff A + c_mass M⁰ + c_mean m mᵀ`; the rank-one term is kept as a border.
    pub fn assemble(&self, c_stiff: f64, c_mass: f64, c_mean: f64) -> SparseMatrix {
        let mut trip = Vec::new();
        for (c, e) in self.elements.iter().enumerate() {
            let d = &self.dofs.cell_dofs[c];
            for (a, &i) in d.iter().enumerate() {
                for (b, &j) in d.iter().enumerate() {
                    let mut v = 0.0;
                    if c_stiff != 0.0 {
                        v += c_stiff * e.stiffness[(a, b)];
                    }
                    if c_mass != 0.0 {
                        v += c_mass * e.mass[(a, b)];
                    }
                    trip.push((i, j, v));
                }
            }
        }
        let n = self.n_dofs();
        let a = SparseMatrix::from_triplets(n, n, trip);
        if c_mean != 0.0 {
            a.with_border(self.mean_vector(), c_mean)
        } else {
            a
        }
    }

    /// Global load vector.
    pub fn assemble_load(&self, load: &Load) -> DVector<f64> {
        let locals: Vec<DVector<f64>> = self
            .elements
            .par_iter()
            .enumerate()
            .map(|(c, e)| match load {
                Load::Zero => DVector::zeros(e.n_dofs()),
                Load::Curl(f) => e.load_curl(*f),
                Load::Grad(f) => e.load_grad(*f),
                Load::Scalar(g) => e.load_scalar(*g),
                Load::Projected(field) => e.load_poly(&field.pi0[c]),
                Load::One => e.mean_row.clone(),
            })
            .collect();
        let mut b = DVector::zeros(self.n_dofs());
        for (c, l) in locals.iter().enumerate() {
            for (a, &g) in self.dofs.cell_dofs[c].iter().enumerate() {
                b[g] += l[a];
            }
        }
        b
    }

    /// Dofs of the interpolant of `g`.
    pub fn interpolate(&self, g: &ScalarFn) -> DVector<f64> {
        let mut v = DVector::zeros(self.n_dofs());
        for (i, p) in self.dofs.node.iter().enumerate() {
            if let Some(p) = p {
                v[i] = g(*p);
            }
        }
        if self.k == 2 {
            let moms: Vec<f64> = self.elements.par_iter().map(|e| e.quadrature().integrate(g)).collect();
            let off = self.dofs.n_vertices + self.dofs.n_edges;
            for (c, m) in moms.into_iter().enumerate() {
                v[off + c] = m;
            }
        }
        v
    }

    /// Nodal values of boundary functions per loop label; boundary dofs of unlisted labels are 0.
    pub fn boundary_values(&self, bc: &[(usize, &ScalarFn)]) -> Result<DVector<f64>> {
        let n_loops = self.mesh.boundary_loops.len();
        for &(label, _) in bc {
            if !self.mesh.boundary_loops.iter().any(|l| l.label == label) {
                return Err(VemError::Config(format!("boundary label {label} not present (mesh has {n_loops} loops)")));
            }
        }
        let mut v = DVector::zeros(self.n_dofs());
        for i in 0..self.n_dofs() {
            if let Some(label) = self.dofs.boundary_label[i] {
                if let Some((_, g)) = bc.iter().find(|(l, _)| *l == label) {
                    v[i] = g(self.dofs.node[i].expect("boundary dofs are nodal"));
                }
            }
        }
        Ok(v)
    }
}

/// Right-hand sides `L(v)` of the scalar solvers.
pub enum Load<'a> {
    Zero,
    /// `(f, curl Π¹v)`.
    Curl(&'a VectorFn),
    /// `(f, grad Π¹v)`.
    Grad(&'a VectorFn),
    /// `(g, Π⁰v)`.
    Scalar(&'a ScalarFn),
    /// `(Π⁰w, Π⁰v)` for a discrete field `w`.
    Projected(&'a ScalarField),
    /// `(1, Π⁰v)`.
    One,
}

/// System restricted to the free dofs after fixing the others.
pub struct ReducedSystem {
    pub matrix: SparseMatrix,
    pub rhs: DVector<f64>,
    pub free: Vec<usize>,
    pub fixed_values: DVector<f64>,
}

impl ReducedSystem {
    /// Full dof vector from a solution on the free dofs.
    pub fn expand(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut u = self.fixed_values.clone();
        for (a, &i) in self.free.iter().enumerate() {
            u[i] = x[a];
        }
        u
    }
}

/// Eliminates the dofs with `fixed[i]` set to `values[i]`, moving their columns to the right-hand side.
pub fn apply_dirichlet(a: &SparseMatrix, b: &DVector<f64>, fixed: &[bool], values: &DVector<f64>) -> ReducedSystem {
    let n = a.nrows();
    let mut pos = vec![usize::MAX; n];
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    for (p, &i) in free.iter().enumerate() {
        pos[i] = p;
    }
    let mut fixed_values = DVector::zeros(n);
    for i in 0..n {
        if fixed[i] {
            fixed_values[i] = values[i];
        }
    }
    let lifted = a.mul_vec(&fixed_values);
    let rhs = DVector::from_fn(free.len(), |p, _| b[free[p]] - lifted[free[p]]);
    let trip = a
        .entries()
        .filter(|&(i, j, _)| !fixed[i] && !fixed[j])
        .map(|(i, j, v)| (pos[i], pos[j], v))
        .collect();
    let mut matrix = SparseMatrix::from_triplets(free.len(), free.len(), trip);
    if let Some(bd) = &a.border {
        let m = DVector::from_fn(free.len(), |p, _| bd.vector[free[p]]);
        matrix = matrix.with_border(m, bd.coeff);
    }
    ReducedSystem { matrix, rhs, free, fixed_values }
}

/// Solves `a_h(u,v) + β(Π⁰u, Π⁰v) = L(v)` for all zero-trace `v`, with `u` equal on each listed
/// boundary loop to the nodal values of its function and 0 on the others.
pub fn solve_dirichlet(space: &Arc<VemSpace>, beta: f64, load: &Load, bc: &[(usize, &ScalarFn)]) -> Result<ScalarField> {
    if beta < 0.0 {
        return Err(VemError::Config(format!("beta must be non-negative, got {beta}")));
    }
    let a = space.assemble(1.0, beta, 0.0);
    let b = space.assemble_load(load);
    let g = space.boundary_values(bc)?;
    let fixed: Vec<bool> = (0..space.n_dofs()).map(|i| space.dofs.is_boundary(i)).collect();
    let red = apply_dirichlet(&a, &b, &fixed, &g);
    let x = if red.free.is_empty() { DVector::zeros(0) } else { SparseSolver::new(&red.matrix)?.solve(&red.rhs)? };
    Ok(ScalarField::new(space.clone(), red.expand(&x)))
}

/// Solves `a_h(u,v) + (u,1)(v,1) = L(v)` for all `v` in the full space.
pub fn solve_neumann_mean(space: &Arc<VemSpace>, load: &Load) -> Result<ScalarField> {
    let a = space.assemble(1.0, 0.0, 1.0);
    let b = space.assemble_load(load);
    let x = SparseSolver::new(&a)?.solve(&b)?;
    Ok(ScalarField::new(space.clone(), x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Pi1,
    Pi0,
}

/// A discrete function with its per-cell projections.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub space: Arc<VemSpace>,
    pub values: DVector<f64>,
    pub pi1: Vec<DVector<f64>>,
    pub pi0: Vec<DVector<f64>>,
}

impl ScalarField {
    pub fn new(space: Arc<VemSpace>, values: DVector<f64>) -> Self {
        assert_eq!(values.len(), space.n_dofs());
        let (pi1, pi0) = (0..space.elements.len())
            .map(|c| {
                let v = space.local(c, &values);
                let e = &space.elements[c];
                (&e.pi1 * &v, &e.pi0 * &v)
            })
            .unzip();
        Self { space, values, pi1, pi0 }
    }

    pub fn zero(space: Arc<VemSpace>) -> Self {
        let n = space.n_dofs();
        Self::new(space, DVector::zeros(n))
    }

    pub fn coeffs(&self, which: Projection, c: usize) -> &DVector<f64> {
        match which {
            Projection::Pi1 => &self.pi1[c],
            Projection::Pi0 => &self.pi0[c],
        }
    }

    pub fn value_in(&self, which: Projection, c: usize, p: Point2) -> f64 {
        self.space.elements[c].basis.value(self.coeffs(which, c).as_slice(), p)
    }

    pub fn gradient_in(&self, which: Projection, c: usize, p: Point2) -> Point2 {
        self.space.elements[c].basis.gradient(self.coeffs(which, c).as_slice(), p)
    }

    pub fn curl_in(&self, which: Projection, c: usize, p: Point2) -> Point2 {
        self.space.elements[c].basis.curl(self.coeffs(which, c).as_slice(), p)
    }

    /// Value of the projection at `p`, locating the cell first.
    pub fn eval(&self, which: Projection, p: Point2) -> Result<f64> {
        let c = self
            .space
            .mesh
            .locate(p)
            .ok_or_else(|| VemError::Geometry(format!("point ({}, {}) is outside the mesh", p.x, p.y)))?;
        Ok(self.value_in(which, c, p))
    }

    /// `(v, 1)_Ω`, exact through Π⁰.
    pub fn global_mean(&self) -> f64 {
        self.space
            .elements
            .iter()
            .enumerate()
            .map(|(c, e)| e.mean_row.dot(&self.space.local(c, &self.values)))
            .sum()
    }

    /// `a_h(self, other)`.
    pub fn energy_product(&self, other: &ScalarField) -> f64 {
        self.space
            .elements
            .iter()
            .enumerate()
            .map(|(c, e)| {
                let u = self.space.local(c, &self.values);
                let v = self.space.local(c, &other.values);
                u.dot(&(&e.stiffness * v))
            })
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.space.clone(), &self.values * s)
    }

    /// `self - s · other`.
    pub fn minus_scaled(&self, s: f64, other: &ScalarField) -> Self {
        Self::new(self.space.clone(), &self.values - &other.values * s)
    }
}
