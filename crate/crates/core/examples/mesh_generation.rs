//! Structured and random Voronoi meshes, nested refinement and shape statistics.

use quadcurl_vem::mesh::{
    gen_random_voronoi, gen_structured_voronoi, refine_quads, refine_to_quads, shape_regularity, DomainSpec,
    LloydOptions, PolygonMesh,
};

fn describe(name: &str, m: &PolygonMesh) {
    let s = shape_regularity(m);
    println!(
        "{name:<28} cells {:>6}  vertices {:>6}  holes {}  h {:.3e}  min edge/h_D {:.3}  kernel/h_D {:.3}",
        m.n_cells(),
        m.n_vertices(),
        m.betti_number(),
        s.h,
        s.min_edge_ratio,
        s.star_kernel_ratio
    );
}

fn main() -> quadcurl_vem::Result<()> {
    for n in [5, 10, 20] {
        describe(&format!("structured n = {n}"), &gen_structured_voronoi(n)?);
    }
    let domains = [
        ("gamma", DomainSpec::GammaShape, 25),
        ("square with hole", DomainSpec::SquareWithHole, 36),
        ("two holes", DomainSpec::TwoHoles, 75),
    ];
    for (name, domain, seeds) in domains {
        let coarse = gen_random_voronoi(&domain, seeds, 1, LloydOptions::default())?;
        describe(&format!("{name}, level 0"), &coarse);
        let mut mesh = refine_to_quads(&coarse)?;
        describe(&format!("{name}, level 1"), &mesh);
        mesh.check_nested_in(&coarse)?;
        for level in 2..4 {
            let fine = refine_quads(&mesh)?;
            fine.check_nested_in(&mesh)?;
            mesh = fine;
            describe(&format!("{name}, level {level}"), &mesh);
        }
    }
    Ok(())
}
