mod common;

use nalgebra::{DMatrix, DVector};
use quadcurl_vem::mesh::{gen_random_voronoi, gen_structured_voronoi, DomainSpec, LloydOptions, PolygonMesh};
use quadcurl_vem::scalar::{solve_dirichlet, solve_neumann_mean, Load, VemSpace};
use quadcurl_vem::sparse::{solve_sparse, SparseMatrix};
use quadcurl_vem::Point2;

fn voronoi_50() -> PolygonMesh {
    gen_random_voronoi(&DomainSpec::UnitSquare, 50, 11, LloydOptions::default()).unwrap()
}

/// Dense k = 1 stiffness assembled straight from the local matrices and vertex numbering.
fn dense_stiffness_k1(space: &VemSpace) -> DMatrix<f64> {
    let n = space.mesh.n_vertices();
    let mut a = DMatrix::zeros(n, n);
    for (c, cell) in space.mesh.cells.iter().enumerate() {
        let k = &space.elements[c].stiffness;
        for (i, &gi) in cell.iter().enumerate() {
            for (j, &gj) in cell.iter().enumerate() {
                a[(gi, gj)] += k[(i, j)];
            }
        }
    }
    a
}

#[test]
fn dirichlet_patch_test_reproduces_polynomials() {
    let mesh = voronoi_50();
    assert!(mesh.n_cells() >= 45);
    // u ∈ ℙ_k with -Δu = g
    let cases: [(usize, fn(Point2) -> f64, f64); 3] = [
        (1, |p| 1.0 + 2.0 * p.x - 3.0 * p.y, 0.0),
        (2, |p| 0.5 - p.x + p.y + 2.0 * p.x * p.x - p.x * p.y + 3.0 * p.y * p.y, -10.0),
        (2, |p| p.x * p.y - 0.25 * p.y, 0.0),
    ];
    for (k, u, g) in cases {
        let space = VemSpace::new(mesh.clone(), k).unwrap();
        let src = move |_: Point2| g;
        let sol = solve_dirichlet(&space, 0.0, &Load::Scalar(&src), &[(0, &u)]).unwrap();
        let want = space.interpolate(&u);
        let err = (&sol.values - &want).amax();
        assert!(err < 1e-9, "k = {k}: patch test error {err:e}");
    }
}

#[test]
fn harmonic_solver_reproduces_linear_data() {
    let lin = |p: Point2| 0.3 - 1.1 * p.x + 0.7 * p.y;
    for domain in [DomainSpec::UnitSquare, DomainSpec::SquareWithHole, DomainSpec::TwoHoles] {
        let mesh = gen_random_voronoi(&domain, 60, 2, LloydOptions::default()).unwrap();
        let labels: Vec<usize> = mesh.boundary_loops.iter().map(|l| l.label).collect();
        for k in [1, 2] {
            let space = VemSpace::new(mesh.clone(), k).unwrap();
            let bc: Vec<(usize, &quadcurl_vem::scalar::ScalarFn)> = labels.iter().map(|&l| (l, &lin as &quadcurl_vem::scalar::ScalarFn)).collect();
            let sol = solve_dirichlet(&space, 0.0, &Load::Zero, &bc).unwrap();
            assert!((&sol.values - space.interpolate(&lin)).amax() < 1e-9);
        }
    }
}

#[test]
fn assembly_matches_dense_oracle_on_square_meshes() {
    for mesh in [gen_structured_voronoi(2).unwrap(), voronoi_50()] {
        let space = VemSpace::new(mesh, 1).unwrap();
        let sparse = space.assemble(1.0, 0.0, 0.0).to_dense();
        let dense = dense_stiffness_k1(&space);
        assert!((sparse - &dense).amax() < 1e-13 * dense.amax());
    }
}

#[test]
fn sparse_solver_matches_dense_on_spd_system() {
    let a = DMatrix::from_row_slice(5, 5, &[
        4.0, -1.0, 0.0, 0.5, 0.0,
        -1.0, 5.0, -2.0, 0.0, 0.0,
        0.0, -2.0, 6.0, -1.0, 0.3,
        0.5, 0.0, -1.0, 3.0, -0.5,
        0.0, 0.0, 0.3, -0.5, 2.0,
    ]);
    let trip: Vec<_> = (0..5).flat_map(|i| (0..5).map(move |j| (i, j))).filter(|&(i, j)| a[(i, j)] != 0.0).map(|(i, j)| (i, j, a[(i, j)])).collect();
    let b = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0, -1.0]);
    let x = solve_sparse(&SparseMatrix::from_triplets(5, 5, trip), &b).unwrap();
    let want = a.cholesky().unwrap().solve(&b);
    assert!((x - want).amax() < 1e-13);
}

#[test]
fn neumann_mean_matches_tested_constant() {
    // testing with v = 1 leaves (u,1)|Ω| = L(1)
    let one = |_: Point2| 1.0;
    let g = |p: Point2| (2.0 * std::f64::consts::PI * p.x).cos() + p.y;
    for k in [1, 2] {
        let space = VemSpace::new(voronoi_50(), k).unwrap();
        let sol = solve_neumann_mean(&space, &Load::Scalar(&g)).unwrap();
        let l1 = space.assemble_load(&Load::Scalar(&g)).dot(&space.interpolate(&one));
        assert!((sol.global_mean() - l1).abs() < 1e-10, "k = {k}");
        assert!((sol.global_mean() - 0.5).abs() < 1e-3);
    }
}
