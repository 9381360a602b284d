//! Discrete Hodge-decomposition pipeline for the quad-curl problem
//! `(curl curl u, curl curl v) + β(curl u, curl v) + γ(u, v) = (f, v)` over divergence-free
//! fields with vanishing tangential trace.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, VemError};
use crate::geometry::Point2;
use crate::scalar::{apply_dirichlet, solve_neumann_mean, Load, ScalarField, VectorFn, VemSpace};
use crate::sparse::{SparseMatrix, SparseSolver};

/// Data of one quad-curl problem on a fixed discrete space.
#[derive(Clone, Copy)]
pub struct QuadCurlProblem<'a> {
    pub beta: f64,
    pub gamma: f64,
    pub f: &'a VectorFn,
}

impl<'a> QuadCurlProblem<'a> {
    pub fn new(beta: f64, gamma: f64, f: &'a VectorFn) -> Result<Self> {
        if !(beta >= 0.0 && gamma >= 0.0) {
            return Err(VemError::Config(format!("beta and gamma must be non-negative (got {beta}, {gamma})")));
        }
        Ok(Self { beta, gamma, f })
    }
}

/// Piecewise polynomial field `curl p + grad q` with per-cell coefficients of `p` and `q`.
#[derive(Debug, Clone)]
pub struct DiscreteVectorField {
    pub space: Arc<VemSpace>,
    pub stream: Vec<DVector<f64>>,
    pub potential: Vec<DVector<f64>>,
}

impl DiscreteVectorField {
    pub fn eval_in(&self, c: usize, p: Point2) -> Point2 {
        let b = &self.space.elements[c].basis;
        b.curl(self.stream[c].as_slice(), p) + b.gradient(self.potential[c].as_slice(), p)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            space: self.space.clone(),
            stream: self.stream.iter().map(|v| v * s).collect(),
            potential: self.potential.iter().map(|v| v * s).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HodgeSolution {
    /// `ρ_h` when `γ = 0`, `ζ_h` when `γ > 0`.
    pub rho: ScalarField,
    pub xi: ScalarField,
    /// `(1, ξ_{1,h})`, positive on every valid mesh.
    pub xi1_mean: f64,
    pub phi: ScalarField,
    pub harmonics: Vec<ScalarField>,
    pub coeffs: Vec<f64>,
    /// `[a_h(φ_i, φ_j)]`.
    pub coeff_matrix: DMatrix<f64>,
    pub u: DiscreteVectorField,
}

/// Factorized zero-trace operator `a_h + β(Π⁰·, Π⁰·)` on the interior dofs.
struct DirichletOperator {
    solver: Option<SparseSolver>,
    free: Vec<usize>,
    n: usize,
}

impl DirichletOperator {
    fn new(space: &VemSpace, beta: f64) -> Result<Self> {
        let a = space.assemble(1.0, beta, 0.0);
        let fixed: Vec<bool> = (0..space.n_dofs()).map(|i| space.dofs.is_boundary(i)).collect();
        let red = apply_dirichlet(&a, &DVector::zeros(space.n_dofs()), &fixed, &DVector::zeros(space.n_dofs()));
        let solver = if red.free.is_empty() { None } else { Some(SparseSolver::new(&red.matrix)?) };
        Ok(Self { solver, free: red.free, n: space.n_dofs() })
    }

    fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let mut u = DVector::zeros(self.n);
        if let Some(s) = &self.solver {
            let rhs = DVector::from_fn(self.free.len(), |p, _| b[self.free[p]]);
            let x = s.solve(&rhs)?;
            for (p, &i) in self.free.iter().enumerate() {
                u[i] = x[p];
            }
        }
        Ok(u)
    }
}

fn combine(x0: ScalarField, x1: ScalarField) -> Result<(f64, f64, ScalarField)> {
    let m1 = x1.global_mean();
    if !(m1 > 0.0) {
        return Err(VemError::Pipeline(format!("(1, xi_1) = {m1:e} is not positive")));
    }
    let ratio = x0.global_mean() / m1;
    Ok((ratio, m1, x0.minus_scaled(ratio, &x1)))
}

/// `γ = 0`: returns `(ρ_h, ξ_h, (1, ξ_{1,h}))`.
pub fn solve_gamma0(space: &Arc<VemSpace>, problem: &QuadCurlProblem) -> Result<(ScalarField, ScalarField, f64)> {
    let rho = solve_neumann_mean(space, &Load::Curl(problem.f))?;
    let op = DirichletOperator::new(space, problem.beta)?;
    let xi0 = ScalarField::new(space.clone(), op.solve(&space.assemble_load(&Load::Projected(&rho)))?);
    let xi1 = ScalarField::new(space.clone(), op.solve(&space.assemble_load(&Load::One))?);
    let (_, m1, xi) = combine(xi0, xi1)?;
    Ok((rho, xi, m1))
}

/// The coupled operator over `V_h × V̊_h` (with the mean border on the first block) and the
/// interior dofs numbering its second block.
pub fn gamma_pos_system(space: &VemSpace, beta: f64, gamma: f64) -> (SparseMatrix, Vec<usize>) {
    let n = space.n_dofs();
    let a = space.assemble(1.0, 0.0, 0.0);
    let m0 = space.assemble(0.0, 1.0, 0.0);
    let free = space.dofs.free_dofs();
    let mut pos = vec![usize::MAX; n];
    for (p, &i) in free.iter().enumerate() {
        pos[i] = p;
    }
    let sg = gamma.sqrt();
    let mut trip = Vec::with_capacity(2 * a.nnz() + 2 * m0.nnz());
    for (i, j, v) in a.entries() {
        trip.push((i, j, v));
        if pos[i] != usize::MAX && pos[j] != usize::MAX {
            trip.push((n + pos[i], n + pos[j], v));
        }
    }
    for (i, j, v) in m0.entries() {
        if pos[j] != usize::MAX {
            trip.push((i, n + pos[j], sg * v));
        }
        if pos[i] != usize::MAX {
            trip.push((n + pos[i], j, -sg * v));
            if pos[j] != usize::MAX && beta != 0.0 {
                trip.push((n + pos[i], n + pos[j], beta * v));
            }
        }
    }
    let dim = n + free.len();
    let mut border = DVector::zeros(dim);
    border.rows_mut(0, n).copy_from(&space.mean_vector());
    (SparseMatrix::from_triplets(dim, dim, trip).with_border(border, 1.0), free)
}

/// `γ > 0`: returns `(ζ_h, ξ_h, (1, ξ_{1,h}))`.
pub fn solve_gamma_pos(space: &Arc<VemSpace>, problem: &QuadCurlProblem) -> Result<(ScalarField, ScalarField, f64)> {
    if !(problem.gamma > 0.0) {
        return Err(VemError::Config("the coupled solver needs gamma > 0".into()));
    }
    let n = space.n_dofs();
    let (sys, free) = gamma_pos_system(space, problem.beta, problem.gamma);
    let solver = SparseSolver::new(&sys)?;
    let dim = sys.nrows();
    let split = |x: DVector<f64>| {
        let zeta = x.rows(0, n).into_owned();
        let mut xi = DVector::zeros(n);
        for (p, &i) in free.iter().enumerate() {
            xi[i] = x[n + p];
        }
        (ScalarField::new(space.clone(), zeta), ScalarField::new(space.clone(), xi))
    };
    let load0 = space.assemble_load(&Load::Curl(problem.f)) / problem.gamma.sqrt();
    let mut b0 = DVector::zeros(dim);
    b0.rows_mut(0, n).copy_from(&load0);
    let load1 = space.assemble_load(&Load::One);
    let mut b1 = DVector::zeros(dim);
    for (p, &i) in free.iter().enumerate() {
        b1[n + p] = load1[i];
    }
    let (z0, x0) = split(solver.solve(&b0)?);
    let (z1, x1) = split(solver.solve(&b1)?);
    let (ratio, m1, xi) = combine(x0, x1)?;
    Ok((z0.minus_scaled(ratio, &z1), xi, m1))
}

/// `a_h(φ_h, ψ) + (φ_h,1)(ψ,1) = (Π⁰ξ_h, Π⁰ψ)`.
pub fn solve_phi(xi: &ScalarField) -> Result<ScalarField> {
    solve_neumann_mean(&xi.space, &Load::Projected(xi))
}

/// Discrete harmonic functions, one per hole: 1 on that hole's boundary nodes, 0 on the others.
pub fn solve_harmonics(space: &Arc<VemSpace>) -> Result<Vec<ScalarField>> {
    let m = space.mesh.betti_number();
    if m == 0 {
        return Ok(Vec::new());
    }
    let a = space.assemble(1.0, 0.0, 0.0);
    let n = space.n_dofs();
    let fixed: Vec<bool> = (0..n).map(|i| space.dofs.is_boundary(i)).collect();
    let zero = DVector::zeros(n);
    let mut solver: Option<SparseSolver> = None;
    let mut out = Vec::with_capacity(m);
    for j in 1..=m {
        let g = DVector::from_fn(n, |i, _| if space.dofs.boundary_label[i] == Some(j) { 1.0 } else { 0.0 });
        let red = apply_dirichlet(&a, &zero, &fixed, &g);
        let x = if red.free.is_empty() {
            DVector::zeros(0)
        } else {
            if solver.is_none() {
                solver = Some(SparseSolver::new(&red.matrix)?);
            }
            solver.as_ref().unwrap().solve(&red.rhs)?
        };
        out.push(ScalarField::new(space.clone(), red.expand(&x)));
    }
    Ok(out)
}

/// Solves `Σ_j a_h(φ_i, φ_j) c_j = γ⁻¹ (f, grad Π¹φ_i)`; returns the coefficients and matrix.
pub fn solve_coefficients(harmonics: &[ScalarField], f: &VectorFn, gamma: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let m = harmonics.len();
    if m == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    if !(gamma > 0.0) {
        return Err(VemError::Config("coefficients of harmonic fields need gamma > 0".into()));
    }
    let space = &harmonics[0].space;
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = harmonics[i].energy_product(&harmonics[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let load = space.assemble_load(&Load::Grad(f));
    let rhs = DVector::from_fn(m, |i, _| load.dot(&harmonics[i].values) / gamma);
    let chol = k
        .clone()
        .cholesky()
        .ok_or_else(|| VemError::Pipeline("harmonic coefficient matrix is not positive definite".into()))?;
    Ok((chol.solve(&rhs).iter().copied().collect(), k))
}

/// `u_h = curl Π¹φ_h + Σ_j c_j grad Π¹φ_{j,h}` cell by cell.
pub fn reconstruct_u(phi: &ScalarField, harmonics: &[ScalarField], coeffs: &[f64]) -> DiscreteVectorField {
    let nc = phi.space.elements.len();
    let potential = (0..nc)
        .map(|c| {
            let mut q = DVector::zeros(phi.pi1[c].len());
            for (h, &cj) in harmonics.iter().zip(coeffs) {
                q += &h.pi1[c] * cj;
            }
            q
        })
        .collect();
    DiscreteVectorField { space: phi.space.clone(), stream: phi.pi1.clone(), potential }
}

/// Full pipeline on one mesh.
pub fn solve(space: &Arc<VemSpace>, problem: &QuadCurlProblem) -> Result<HodgeSolution> {
    let m = space.mesh.betti_number();
    let (rho, xi, xi1_mean) = if problem.gamma == 0.0 {
        if m > 0 {
            return Err(VemError::Config(format!("gamma must be positive on a domain with {m} hole(s)")));
        }
        solve_gamma0(space, problem)?
    } else {
        solve_gamma_pos(space, problem)?
    };
    let phi = solve_phi(&xi)?;
    let harmonics = solve_harmonics(space)?;
    let (coeffs, coeff_matrix) = solve_coefficients(&harmonics, problem.f, problem.gamma)?;
    let u = reconstruct_u(&phi, &harmonics, &coeffs);
    Ok(HodgeSolution { rho, xi, xi1_mean, phi, harmonics, coeffs, coeff_matrix, u })
}
