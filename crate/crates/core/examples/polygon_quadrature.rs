//! Exact polynomial integration on polygons: triangle-fan rules against boundary moments.

use quadcurl_vem::basis::monomial_exponents;
use quadcurl_vem::geometry::{centroid, diameter};
use quadcurl_vem::quadrature::{polygon_moments, polygon_quadrature};
use quadcurl_vem::Point2;

fn main() -> quadcurl_vem::Result<()> {
    // a non-convex pentagon
    let poly = [
        Point2::new(0.0, 0.0),
        Point2::new(2.0, 0.0),
        Point2::new(2.0, 1.5),
        Point2::new(1.0, 0.6),
        Point2::new(0.0, 1.5),
    ];
    let (c, h) = (centroid(&poly), diameter(&poly));
    let degree = 4;
    let rule = polygon_quadrature(&poly, degree)?;
    let moments = polygon_moments(&poly, c, h, degree)?;
    println!("{} quadrature points for degree {degree}", rule.len());
    println!("{:>8} {:>22} {:>22} {:>10}", "(p, q)", "quadrature", "moments", "diff");
    for (i, &(p, q)) in monomial_exponents(degree).iter().enumerate() {
        let m = |x: Point2| ((x.x - c.x) / h).powi(p as i32) * ((x.y - c.y) / h).powi(q as i32);
        let by_rule = rule.integrate(m);
        println!("{:>8} {by_rule:>22.15e} {:>22.15e} {:>10.1e}", format!("({p}, {q})"), moments[i], (by_rule - moments[i]).abs());
    }
    Ok(())
}
