//! Discrete harmonic fields and Hodge coefficients on a multiply connected domain.

use quadcurl_vem::experiment::smooth_rhs;
use quadcurl_vem::hodge::{solve, QuadCurlProblem};
use quadcurl_vem::mesh::{gen_random_voronoi, refine_quads, refine_to_quads, DomainSpec, LloydOptions};
use quadcurl_vem::scalar::VemSpace;

fn main() -> quadcurl_vem::Result<()> {
    let problem = QuadCurlProblem::new(1.0, 1.0, &smooth_rhs)?;
    for (name, domain, seeds) in [("square with hole", DomainSpec::SquareWithHole, 36), ("two holes", DomainSpec::TwoHoles, 75)] {
        println!("{name}");
        let mut mesh = refine_to_quads(&gen_random_voronoi(&domain, seeds, 4, LloydOptions::default())?)?;
        for _ in 0..3 {
            let space = VemSpace::new(mesh.clone(), 1)?;
            let sol = solve(&space, &problem)?;
            let gram: Vec<String> = sol.coeff_matrix.row_iter().map(|r| format!("{:.4?}", r.iter().collect::<Vec<_>>())).collect();
            let coeffs: Vec<String> = sol.coeffs.iter().map(|c| format!("{c:+.5}")).collect();
            println!("  dofs {:>6}  Gram matrix {}  coefficients [{}]", space.n_dofs(), gram.join(" "), coeffs.join(", "));
            mesh = refine_quads(&mesh)?;
        }
    }
    Ok(())
}
