mod common;

use proptest::prelude::*;
use quadcurl_vem::geometry::{point_in_polygon, signed_area};
use quadcurl_vem::mesh::{
    gen_random_voronoi, gen_structured_voronoi, parse_mesh, refine_quads, refine_to_quads, shape_regularity,
    write_mesh, DomainSpec, LloydOptions, PolygonMesh,
};

const DOMAINS: [DomainSpec; 4] =
    [DomainSpec::UnitSquare, DomainSpec::GammaShape, DomainSpec::SquareWithHole, DomainSpec::TwoHoles];

/// V - E + F for a planar domain with `loops` boundary components.
fn check_euler(m: &PolygonMesh) {
    let e = m.topology().unwrap().n_edges() as i64;
    let (v, f, loops) = (m.n_vertices() as i64, m.n_cells() as i64, m.boundary_loops.len() as i64);
    assert_eq!(v - e + f, 2 - loops);
}

fn check_mesh(m: &PolygonMesh, domain: &DomainSpec) {
    m.validate().unwrap();
    check_euler(m);
    assert_eq!(m.betti_number(), domain.betti_number());
    assert!((m.area() - domain.area()).abs() < 1e-12 * domain.area());
    let s = shape_regularity(m);
    assert!(s.h > 0.0 && s.min_edge_ratio > 0.0 && s.star_kernel_ratio > 0.0);
    for c in 0..m.n_cells() {
        assert!(signed_area(&m.cell_polygon(c)) > 0.0);
    }
}

/// Every vertex of every fine cell lies in its parent cell.
fn check_nested(fine: &PolygonMesh, coarse: &PolygonMesh) {
    let parents = fine.parent_of_cell.as_ref().unwrap();
    let tol = 1e-12 * coarse.h();
    for (c, cell) in fine.cells.iter().enumerate() {
        let parent = coarse.cell_polygon(parents[c]);
        assert!(cell.iter().all(|&v| point_in_polygon(fine.vertices[v], &parent, tol)));
    }
    let area: f64 = (0..coarse.n_cells()).map(|p| {
        let children: f64 = (0..fine.n_cells()).filter(|&c| parents[c] == p).map(|c| signed_area(&fine.cell_polygon(c))).sum();
        (children - signed_area(&coarse.cell_polygon(p))).abs()
    }).sum();
    assert!(area < 1e-12);
    assert_eq!(fine.level, coarse.level + 1);
}

#[test]
fn structured_meshes() {
    for n in [2, 4, 5, 10] {
        let m = gen_structured_voronoi(n).unwrap();
        check_mesh(&m, &DomainSpec::UnitSquare);
        assert_eq!(m.n_cells(), (n + 1) * (n + 1));
    }
}

#[test]
fn random_meshes_on_every_domain() {
    for (i, d) in DOMAINS.iter().enumerate() {
        for seed in 1..6 {
            let m = gen_random_voronoi(d, 30 + 10 * i, seed, LloydOptions::default()).unwrap();
            check_mesh(&m, d);
        }
    }
}

#[test]
fn nested_refinement_keeps_invariants() {
    for d in &DOMAINS {
        let coarse = gen_random_voronoi(d, 40, 3, LloydOptions::default()).unwrap();
        let l1 = refine_to_quads(&coarse).unwrap();
        check_mesh(&l1, d);
        check_nested(&l1, &coarse);
        let l2 = refine_quads(&l1).unwrap();
        check_mesh(&l2, d);
        check_nested(&l2, &l1);
        assert!(l2.cells.iter().all(|c| c.len() == 4));
    }
}

#[test]
fn generation_is_deterministic_and_round_trips() {
    for d in &DOMAINS {
        let a = gen_random_voronoi(d, 25, 42, LloydOptions::default()).unwrap();
        let b = gen_random_voronoi(d, 25, 42, LloydOptions::default()).unwrap();
        assert_eq!(write_mesh(&a), write_mesh(&b));
        let fine = refine_to_quads(&a).unwrap();
        let back = parse_mesh(&write_mesh(&fine)).unwrap();
        assert_eq!(write_mesh(&back), write_mesh(&fine));
        assert_eq!(back.parent_of_cell, fine.parent_of_cell);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_generation_is_valid(seed in 0u64..1_000_000, n in 8usize..80, d in 0usize..4, lloyd in 0usize..30) {
        let domain = &DOMAINS[d];
        let m = gen_random_voronoi(domain, n, seed, LloydOptions { max_iters: lloyd, ..LloydOptions::default() });
        // too few seeds for the hole domains are rejected, never produce broken meshes
        if let Ok(m) = m {
            check_mesh(&m, domain);
            let fine = refine_to_quads(&m).unwrap();
            check_nested(&fine, &m);
        }
    }
}
