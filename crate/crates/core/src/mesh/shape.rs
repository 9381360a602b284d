use super::PolygonMesh;
use crate::geometry::{clip_half_plane, diameter, HalfPlane, Point2};

/// Shape-regularity figures of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeReport {
    /// Largest cell diameter.
    pub h: f64,
    /// Smallest ratio `|e| / h_D` over all cells and edges.
    pub min_edge_ratio: f64,
    /// Smallest ratio `r_D / h_D`, with `r_D` the radius of the largest disc inside the
    /// kernel of the cell (the cell is star-shaped with respect to that disc).
    pub star_kernel_ratio: f64,
}

pub fn shape_regularity(mesh: &PolygonMesh) -> ShapeReport {
    let mut rep = ShapeReport { h: 0.0, min_edge_ratio: f64::INFINITY, star_kernel_ratio: f64::INFINITY };
    for c in 0..mesh.n_cells() {
        let poly = mesh.cell_polygon(c);
        let hd = diameter(&poly);
        rep.h = rep.h.max(hd);
        let n = poly.len();
        let min_edge = (0..n).map(|i| poly[i].dist(poly[(i + 1) % n])).fold(f64::INFINITY, f64::min);
        rep.min_edge_ratio = rep.min_edge_ratio.min(min_edge / hd);
        rep.star_kernel_ratio = rep.star_kernel_ratio.min(kernel_inradius(&poly) / hd);
    }
    rep
}

/// Kernel of a counter-clockwise polygon: intersection of the left half-planes of its edges.
pub fn polygon_kernel(poly: &[Point2]) -> Vec<Point2> {
    let n = poly.len();
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for p in poly {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let mut k = vec![lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)];
    for i in 0..n {
        k = clip_half_plane(&k, &HalfPlane::left_of(poly[i], poly[(i + 1) % n]));
        if k.len() < 3 {
            return Vec::new();
        }
    }
    k
}

/// Radius of the largest disc inside the kernel, by enumerating the discs tangent to three
/// supporting lines of the kernel (the optimum of the Chebyshev-centre LP is attained there).
fn kernel_inradius(poly: &[Point2]) -> f64 {
    let n = poly.len();
    // lines of the original edges bound the kernel
    let lines: Vec<(Point2, f64)> = (0..n)
        .filter_map(|i| {
            let a = poly[i];
            let d = poly[(i + 1) % n] - a;
            let len = d.norm();
            if len == 0.0 {
                return None;
            }
            // inward unit normal for a CCW loop
            let nrm = Point2::new(-d.y / len, d.x / len);
            Some((nrm, nrm.dot(a)))
        })
        .collect();
    let kernel = polygon_kernel(poly);
    if kernel.is_empty() {
        return 0.0;
    }
    let feasible = |c: Point2, r: f64| lines.iter().all(|&(nrm, b)| nrm.dot(c) - b >= r - 1e-12 * (1.0 + r));
    let mut best: f64 = 0.0;
    let m = lines.len();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                // n·c - r = b for the three lines
                let a = nalgebra::Matrix3::new(
                    lines[i].0.x, lines[i].0.y, -1.0,
                    lines[j].0.x, lines[j].0.y, -1.0,
                    lines[k].0.x, lines[k].0.y, -1.0,
                );
                let rhs = nalgebra::Vector3::new(lines[i].1, lines[j].1, lines[k].1);
                if let Some(sol) = a.lu().solve(&rhs) {
                    let (c, r) = (Point2::new(sol[0], sol[1]), sol[2]);
                    if r.is_finite() && r > best && feasible(c, r) {
                        best = r;
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{refine_quads, unit_square_cell};

    #[test]
    fn unit_square_ratios() {
        let r = shape_regularity(&unit_square_cell());
        assert!((r.h - 2f64.sqrt()).abs() < 1e-15);
        assert!((r.min_edge_ratio - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((r.star_kernel_ratio - 0.5 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn refinement_of_square_keeps_ratios() {
        let a = shape_regularity(&unit_square_cell());
        let b = shape_regularity(&refine_quads(&unit_square_cell()).unwrap());
        assert!((a.min_edge_ratio - b.min_edge_ratio).abs() < 1e-14);
        assert!((a.star_kernel_ratio - b.star_kernel_ratio).abs() < 1e-12);
        assert!((b.h - a.h / 2.0).abs() < 1e-15);
    }

    #[test]
    fn l_shape_kernel_is_the_corner_square() {
        let l = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let k = polygon_kernel(&l);
        assert!((crate::geometry::signed_area(&k) - 1.0).abs() < 1e-14);
        assert!((kernel_inradius(&l) - 0.5).abs() < 1e-12);
    }
}
