mod common;

use common::{rng, Jet};
use nalgebra::DMatrix;
use quadcurl_vem::experiment::{manufactured, preset, smooth_rhs};
use quadcurl_vem::hodge::{gamma_pos_system, solve, QuadCurlProblem};
use quadcurl_vem::mesh::{gen_random_voronoi, gen_structured_voronoi, refine_to_quads, DomainSpec, LloydOptions, PolygonMesh};
use quadcurl_vem::scalar::VemSpace;
use quadcurl_vem::{Point2, VemError};
use rand::RngExt;

fn coarse(domain: &DomainSpec) -> PolygonMesh {
    let seeds = match domain {
        DomainSpec::TwoHoles => 75,
        DomainSpec::SquareWithHole => 36,
        _ => 25,
    };
    gen_random_voronoi(domain, seeds, 1, LloydOptions::default()).unwrap()
}

#[test]
fn manufactured_load_matches_jet_differentiation() {
    // φ = s(x) s(y) with s = sin³(πt); f = curl Δ²φ, u = curl φ, ξ = -Δφ
    let d = |t: f64, n: usize| {
        let s = Jet::sin_scaled(std::f64::consts::PI, t, 6);
        s.mul(&s).mul(&s).derivative(n)
    };
    let mut r = rng(1);
    for _ in 0..100 {
        let p = Point2::new(r.random_range(0.0..1.0), r.random_range(0.0..1.0));
        let (x, y) = (p.x, p.y);
        let bilap_dy = d(x, 4) * d(y, 1) + 2.0 * d(x, 2) * d(y, 3) + d(x, 0) * d(y, 5);
        let bilap_dx = d(x, 5) * d(y, 0) + 2.0 * d(x, 3) * d(y, 2) + d(x, 1) * d(y, 4);
        let f = manufactured::f(p);
        let scale = 1.0 + f.norm();
        assert!((f.x - bilap_dy).abs() < 1e-8 * scale && (f.y + bilap_dx).abs() < 1e-8 * scale);
        let u = manufactured::u(p);
        assert!((u.x - d(x, 0) * d(y, 1)).abs() < 1e-12 && (u.y + d(x, 1) * d(y, 0)).abs() < 1e-12);
        let xi = -(d(x, 2) * d(y, 0) + d(x, 0) * d(y, 2));
        assert!((manufactured::xi(p) - xi).abs() < 1e-10 * (1.0 + xi.abs()));
        let g = manufactured::grad_xi(p);
        let gx = -(d(x, 3) * d(y, 0) + d(x, 1) * d(y, 2));
        let gy = -(d(x, 2) * d(y, 1) + d(x, 0) * d(y, 3));
        assert!((g.x - gx).abs() < 1e-9 * (1.0 + gx.abs()) && (g.y - gy).abs() < 1e-9 * (1.0 + gy.abs()));
    }
}

#[test]
fn dispatch_and_structure() {
    let e1 = preset("exp1").unwrap();
    let f1 = move |p: Point2| e1.rhs.eval(p);
    let space = VemSpace::new(gen_structured_voronoi(4).unwrap(), 1).unwrap();
    let sol = solve(&space, &QuadCurlProblem::new(0.0, 0.0, &f1).unwrap()).unwrap();
    assert!(sol.harmonics.is_empty() && sol.coeffs.is_empty());

    let hole = VemSpace::new(coarse(&DomainSpec::SquareWithHole), 1).unwrap();
    let sol = solve(&hole, &QuadCurlProblem::new(1.0, 1.0, &smooth_rhs).unwrap()).unwrap();
    assert_eq!((sol.harmonics.len(), sol.coeffs.len()), (1, 1));
    assert!(matches!(solve(&hole, &QuadCurlProblem::new(0.0, 0.0, &smooth_rhs).unwrap()), Err(VemError::Config(_))));
    assert!(QuadCurlProblem::new(-1.0, 0.0, &smooth_rhs).is_err());
}

#[test]
fn harmonic_energy_matches_dense_oracle() {
    let mesh = coarse(&DomainSpec::SquareWithHole);
    let space = VemSpace::new(mesh.clone(), 1).unwrap();
    let sol = solve(&space, &QuadCurlProblem::new(1.0, 1.0, &smooth_rhs).unwrap()).unwrap();
    // dense assembly and Dirichlet solve with value 1 on the hole, 0 outside
    let n = mesh.n_vertices();
    let mut a = DMatrix::zeros(n, n);
    for (c, cell) in mesh.cells.iter().enumerate() {
        for (i, &gi) in cell.iter().enumerate() {
            for (j, &gj) in cell.iter().enumerate() {
                a[(gi, gj)] += space.elements[c].stiffness[(i, j)];
            }
        }
    }
    let labels = mesh.vertex_loop_labels();
    let free: Vec<usize> = (0..n).filter(|&v| labels[v].is_none()).collect();
    let g: Vec<f64> = (0..n).map(|v| if labels[v] == Some(1) { 1.0 } else { 0.0 }).collect();
    let aff = DMatrix::from_fn(free.len(), free.len(), |i, j| a[(free[i], free[j])]);
    let rhs = nalgebra::DVector::from_fn(free.len(), |i, _| -(0..n).map(|v| a[(free[i], v)] * g[v]).sum::<f64>());
    let x = aff.lu().solve(&rhs).unwrap();
    let mut phi = nalgebra::DVector::from_vec(g);
    for (i, &v) in free.iter().enumerate() {
        phi[v] = x[i];
    }
    let energy = phi.dot(&(&a * &phi));
    assert!((sol.coeff_matrix[(0, 0)] - energy).abs() < 1e-9 * energy);
}

#[test]
fn invariants_on_every_domain() {
    let cases = [
        (gen_structured_voronoi(5).unwrap(), 0.0),
        (coarse(&DomainSpec::UnitSquare), 0.0),
        (refine_to_quads(&coarse(&DomainSpec::GammaShape)).unwrap(), 0.0),
        (coarse(&DomainSpec::SquareWithHole), 1.0),
        (coarse(&DomainSpec::TwoHoles), 1.0),
    ];
    for (mesh, gamma) in cases {
        for k in [1, 2] {
            let space = VemSpace::new(mesh.clone(), k).unwrap();
            let f = |p: Point2| smooth_rhs(p);
            let sol = solve(&space, &QuadCurlProblem::new(gamma, gamma, &f).unwrap()).unwrap();
            let scale = sol.xi.values.amax().max(1.0);
            assert!(sol.xi.global_mean().abs() < 1e-10 * scale);
            assert!(sol.phi.global_mean().abs() < 1e-10 * scale);
            assert!(sol.xi1_mean > 0.0);
            if gamma == 0.0 {
                assert!(sol.rho.global_mean().abs() < 1e-10 * sol.rho.values.amax().max(1.0));
            }
            let m = &sol.coeff_matrix;
            assert!((m - m.transpose()).amax() <= 1e-12 * m.amax().max(1.0));
            assert!(m.nrows() == 0 || m.clone().cholesky().is_some());
            // ξ vanishes on the boundary
            for i in 0..space.n_dofs() {
                if space.dofs.is_boundary(i) {
                    assert_eq!(sol.xi.values[i], 0.0);
                }
            }
        }
    }
}

#[test]
fn coupled_blocks_are_skew() {
    let space = VemSpace::new(coarse(&DomainSpec::SquareWithHole), 2).unwrap();
    let n = space.n_dofs();
    let (sys, free) = gamma_pos_system(&space, 0.5, 3.0);
    let d = sys.to_dense();
    let nf = free.len();
    let b12 = d.view((0, n), (n, nf)).into_owned();
    let b21 = d.view((n, 0), (nf, n)).into_owned();
    assert!(b12.amax() > 0.0);
    assert!((b12 + b21.transpose()).amax() < 1e-14 * d.amax());
}

#[test]
fn pipeline_is_linear_in_the_load() {
    for (mesh, gamma) in [(gen_structured_voronoi(4).unwrap(), 0.0), (coarse(&DomainSpec::TwoHoles), 1.0)] {
        let space = VemSpace::new(mesh, 2).unwrap();
        let f2 = |p: Point2| 2.0 * smooth_rhs(p);
        let a = solve(&space, &QuadCurlProblem::new(gamma, gamma, &smooth_rhs).unwrap()).unwrap();
        let b = solve(&space, &QuadCurlProblem::new(gamma, gamma, &f2).unwrap()).unwrap();
        let rel = |x: &nalgebra::DVector<f64>, y: &nalgebra::DVector<f64>| (2.0 * x - y).amax() / y.amax().max(1e-300);
        assert!(rel(&a.xi.values, &b.xi.values) < 1e-12);
        assert!(rel(&a.phi.values, &b.phi.values) < 1e-12);
        for (ca, cb) in a.coeffs.iter().zip(&b.coeffs) {
            assert!((2.0 * ca - cb).abs() < 1e-12 * cb.abs());
        }
    }
}
