//! Scalar virtual element solver: a Dirichlet problem with a known smooth solution.

use quadcurl_vem::mesh::{gen_random_voronoi, DomainSpec, LloydOptions};
use quadcurl_vem::scalar::{solve_dirichlet, Load, Projection, VemSpace};
use quadcurl_vem::Point2;

fn main() -> quadcurl_vem::Result<()> {
    use std::f64::consts::PI;
    let exact = |p: Point2| (PI * p.x).sin() * (PI * p.y).sin() + p.x;
    let grad = |p: Point2| Point2::new(PI * (PI * p.x).cos() * (PI * p.y).sin() + 1.0, PI * (PI * p.x).sin() * (PI * p.y).cos());
    let source = |p: Point2| 2.0 * PI * PI * (PI * p.x).sin() * (PI * p.y).sin();
    let boundary = |p: Point2| p.x;
    for k in [1, 2] {
        println!("k = {k}");
        for seeds in [50, 200, 800] {
            let mesh = gen_random_voronoi(&DomainSpec::UnitSquare, seeds, 1, LloydOptions::default())?;
            let space = VemSpace::new(mesh, k)?;
            let u = solve_dirichlet(&space, 0.0, &Load::Scalar(&source), &[(0, &boundary)])?;
            let mut err = 0.0;
            for (c, el) in space.elements.iter().enumerate() {
                err += el.quadrature().integrate(|p| {
                    let d = u.gradient_in(Projection::Pi1, c, p) - grad(p);
                    d.dot(d)
                });
            }
            let nodal = (&u.values - space.interpolate(&exact)).amax();
            println!("  {:>5} dofs  h {:.3e}  |grad(u - Π¹u_h)| {:.3e}  max dof error {nodal:.3e}", space.n_dofs(), space.mesh.h(), err.sqrt());
        }
    }
    Ok(())
}
