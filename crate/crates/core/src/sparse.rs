//! Compressed sparse rows with an optional rank-one border, and a direct solver on top of
//! faer's sparse LU.

use std::io::Write;

use faer::sparse::{SparseColMat, Triplet};
use faer::linalg::solvers::Solve;
use faer::Mat;
use nalgebra::{DMatrix, DVector};

use crate::error::{Result, VemError};

/// Term `coeff · m mᵀ` added to a sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Border {
    pub vector: DVector<f64>,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    pub border: Option<Border>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed in input order, so the
    /// result does not depend on anything but the triplet sequence.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { nrows, ncols, row_ptr, col_idx, values, border: None }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn with_border(mut self, vector: DVector<f64>, coeff: f64) -> Self {
        assert_eq!(vector.len(), self.ncols);
        self.border = Some(Border { vector, coeff });
        self
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of the sparse part as `(row, col, value)`, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (i, self.col_idx[p], self.values[p]))
        })
    }

    /// Entry of the sparse part (the border is not included).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(p) => self.values[self.row_ptr[i] + p],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = DVector::from_fn(self.nrows, |i, _| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(|p| self.values[p] * x[self.col_idx[p]]).sum()
        });
        if let Some(b) = &self.border {
            y += &b.vector * (b.coeff * b.vector.dot(x));
        }
        y
    }

    /// `‖ |A| |x| ‖`, the scale of the rounding error in `A x`.
    pub fn abs_mul_norm(&self, x: &DVector<f64>) -> f64 {
        let mut y = DVector::from_fn(self.nrows, |i, _| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(|p| (self.values[p] * x[self.col_idx[p]]).abs()).sum::<f64>()
        });
        if let Some(b) = &self.border {
            let s = b.vector.abs().dot(&x.abs()) * b.coeff.abs();
            y += b.vector.abs() * s;
        }
        y.norm()
    }

    /// Dense copy including the border.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.entries() {
            a[(i, j)] += v;
        }
        if let Some(b) = &self.border {
            a += &b.vector * b.vector.transpose() * b.coeff;
        }
        a
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::from_triplets(self.ncols, self.nrows, self.entries().map(|(i, j, v)| (j, i, v)).collect());
        t.border = self.border.clone();
        t
    }

    /// Whether the sparse part is symmetric up to `tol` times its largest entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.entries().all(|(i, j, v)| (v - self.get(j, i)).abs() <= tol * scale)
    }

    /// Writes the sparse part as `i j value` lines (0-based).
    pub fn write_coordinate(&self, mut w: impl Write) -> std::io::Result<()> {
        for (i, j, v) in self.entries() {
            writeln!(w, "{i} {j} {v:e}")?;
        }
        Ok(())
    }
}

/// Relative residual required of every solve.
pub const SOLVER_TOL: f64 = 1e-10;
/// Multiple of `ε ‖|A||x|‖ / ‖b‖` accepted when that exceeds [`SOLVER_TOL`].
pub const ROUNDING_FACTOR: f64 = 16.0;
/// Largest relative residual ever accepted.
pub const ROUNDING_CAP: f64 = 1e-6;

/// Low-rank correction `x = y - W S⁻¹ Uᵀy` applied after a solve with the sparse part.
struct Woodbury {
    pin: usize,
    vector: DVector<f64>,
    w: [DVector<f64>; 2],
    s_inv: nalgebra::Matrix2<f64>,
}

/// LU factorization of a square sparse matrix, reusable for several right-hand sides.
/// A border `c m mᵀ` stays out of the factorization: one diagonal entry `j` is shifted by `α`
/// so that the sparse part is regular, and the rank-two difference `c m mᵀ - α e_j e_jᵀ` is
/// handled by the Woodbury identity.
pub struct SparseSolver {
    matrix: SparseMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    n: usize,
    correction: Option<Woodbury>,
}

impl SparseSolver {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(VemError::Solver(format!("matrix is {}x{}, not square", a.nrows, a.ncols)));
        }
        let n = a.nrows;
        let mut trip: Vec<Triplet<usize, usize, f64>> =
            a.entries().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        let border = a.border.as_ref().filter(|b| b.coeff != 0.0 && b.vector.amax() > 0.0);
        let mut pin = None;
        if let Some(b) = border {
            let j = b.vector.iamax();
            let alpha = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max).max(1.0);
            trip.push(Triplet::new(j, j, alpha));
            pin = Some((j, alpha, b));
        }
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| VemError::Solver(format!("cannot build sparse matrix: {e:?}")))?;
        let lu = mat.sp_lu().map_err(|e| VemError::Solver(format!("LU factorization failed: {e:?}")))?;
        let mut solver = Self { matrix: a.clone(), lu, n, correction: None };
        if let Some((j, alpha, b)) = pin {
            let mut ej = DVector::zeros(n);
            ej[j] = 1.0;
            let w = [solver.raw_solve(&ej), solver.raw_solve(&b.vector)];
            let s = nalgebra::Matrix2::new(
                -1.0 / alpha + w[0][j],
                w[1][j],
                b.vector.dot(&w[0]),
                1.0 / b.coeff + b.vector.dot(&w[1]),
            );
            let s_inv = s
                .try_inverse()
                .filter(|m| m.iter().all(|v| v.is_finite()))
                .ok_or_else(|| VemError::Solver("singular bordered system".into()))?;
            solver.correction = Some(Woodbury { pin: j, vector: b.vector.clone(), w, s_inv });
        }
        Ok(solver)
    }

    fn raw_solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut rhs = Mat::<f64>::zeros(self.n, 1);
        for i in 0..self.n {
            rhs[(i, 0)] = b[i];
        }
        self.lu.solve_in_place(rhs.as_mut());
        let mut y = DVector::from_fn(self.n, |i, _| rhs[(i, 0)]);
        if let Some(c) = &self.correction {
            let z = c.s_inv * nalgebra::Vector2::new(y[c.pin], c.vector.dot(&y));
            y -= &c.w[0] * z[0] + &c.w[1] * z[1];
        }
        y
    }

    /// Solves `A x = b` to relative residual [`SOLVER_TOL`], refining iteratively if needed.
    /// When `ε ‖|A||x|‖` exceeds that target the residual cannot be computed more accurately
    /// than its rounding error, and a residual within a small multiple of it (and below
    /// [`ROUNDING_CAP`]) is accepted instead.
    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let bnorm = b.norm();
        if bnorm == 0.0 {
            return Ok(DVector::zeros(self.n));
        }
        let mut x = self.raw_solve(b);
        let mut best = (f64::INFINITY, x.clone());
        for _ in 0..5 {
            if !x.iter().all(|v| v.is_finite()) {
                return Err(VemError::Solver("singular system (non-finite solution)".into()));
            }
            let r = b - self.matrix.mul_vec(&x);
            let rel = r.norm() / bnorm;
            if rel <= SOLVER_TOL {
                return Ok(x);
            }
            if rel < best.0 {
                best = (rel, x.clone());
            }
            x += self.raw_solve(&r);
        }
        let (rel, x) = best;
        let floor = ROUNDING_FACTOR * f64::EPSILON * self.matrix.abs_mul_norm(&x) / bnorm;
        if rel <= floor && rel <= ROUNDING_CAP {
            return Ok(x);
        }
        Err(VemError::Solver(format!(
            "relative residual {rel:.3e} above {SOLVER_TOL:e} (rounding level {floor:.1e}); the system is singular or too ill-conditioned"
        )))
    }
}

/// One-shot solve of `A x = b`.
pub fn solve_sparse(a: &SparseMatrix, b: &DVector<f64>) -> Result<DVector<f64>> {
    SparseSolver::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve() {
        let b = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        assert_eq!(solve_sparse(&SparseMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn duplicates_are_summed() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 1, 2.0), (0, 0, 3.0)]);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn spd_matches_dense() {
        let n = 5;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, t);
        let b = DVector::from_fn(n, |i, _| (i as f64).sin() + 1.0);
        let x = solve_sparse(&a, &b).unwrap();
        let xd = a.to_dense().lu().solve(&b).unwrap();
        assert!((x - xd).amax() < 1e-14);
    }

    #[test]
    fn singular_laplacian_is_rejected() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 1.0)],
        );
        let b = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!(matches!(solve_sparse(&a, &b), Err(VemError::Solver(_))));
    }

    #[test]
    fn border_pins_the_constant() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 1.0)],
        )
        .with_border(DVector::from_element(3, 1.0), 1.0);
        let b = DVector::from_vec(vec![1.0, 0.0, -1.0]);
        let x = solve_sparse(&a, &b).unwrap();
        let xd = a.to_dense().lu().solve(&b).unwrap();
        assert!((x - xd).amax() < 1e-13);
    }
}
