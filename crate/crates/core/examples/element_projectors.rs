//! Local virtual element on a single polygon: dofs, projectors and polynomial consistency.

use nalgebra::DVector;
use quadcurl_vem::element::LocalElement;
use quadcurl_vem::Point2;

fn main() -> quadcurl_vem::Result<()> {
    let hexagon: Vec<Point2> = (0..6)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / 3.0 + 0.2;
            Point2::new(0.5 + 0.4 * t.cos(), 0.5 + 0.3 * t.sin())
        })
        .collect();
    for k in [1, 2] {
        let el = LocalElement::new(0, &hexagon, k)?;
        let nb = el.basis.dim();
        // Π¹ and Π⁰ applied to the dofs of every monomial give the monomial back
        let mut worst: f64 = 0.0;
        for a in 0..nb {
            let e = DVector::from_fn(nb, |i, _| if i == a { 1.0 } else { 0.0 });
            let dofs = el.dofs_of_poly(&e);
            worst = worst.max((&el.pi1 * &dofs - &e).amax()).max((&el.pi0 * &dofs - &e).amax());
        }
        let eig = el.stiffness.clone().symmetric_eigen().eigenvalues;
        let zero = eig.iter().filter(|&&l| l.abs() < 1e-10 * eig.amax()).count();
        println!(
            "k = {k}: {} dofs, {nb} monomials, projector consistency error {worst:.1e}, stiffness kernel dimension {zero}",
            el.n_dofs()
        );
    }
    Ok(())
}
