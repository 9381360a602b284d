//! Full Hodge-decomposition solve of the quad-curl problem with a manufactured solution.

use quadcurl_vem::experiment::manufactured;
use quadcurl_vem::hodge::{solve, QuadCurlProblem};
use quadcurl_vem::mesh::gen_structured_voronoi;
use quadcurl_vem::metrics::{boundary_tangential_error, h1_broken_error_xi, l2_error_u};
use quadcurl_vem::scalar::VemSpace;

fn main() -> quadcurl_vem::Result<()> {
    let problem = QuadCurlProblem::new(0.0, 0.0, &manufactured::f)?;
    for k in [1, 2] {
        println!("k = {k}");
        for n in [5, 10, 20, 40] {
            let space = VemSpace::new(gen_structured_voronoi(n)?, k)?;
            let sol = solve(&space, &problem)?;
            let e_u = l2_error_u(&sol.u, &manufactured::u);
            let e_xi = h1_broken_error_xi(&sol.xi, &manufactured::grad_xi);
            let (e_bdry, _) = boundary_tangential_error(&sol.u)?;
            println!(
                "  n {n:>3}  dofs {:>6}  e_u {e_u:.4e}  e_xi {e_xi:.4e}  e_bdry {e_bdry:.4e}  mean(xi_h) {:.1e}",
                space.n_dofs(),
                sol.xi.global_mean()
            );
        }
    }
    Ok(())
}
