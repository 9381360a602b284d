use std::collections::HashMap;

use super::{BoundaryLoop, PolygonMesh, Topology};
use crate::error::{Result, VemError};
use crate::geometry::{centroid, segment_intersection, signed_area, Point2};

/// Splits every n-gon into n quadrilaterals by joining its barycentre to the edge midpoints.
pub fn refine_to_quads(mesh: &PolygonMesh) -> Result<PolygonMesh> {
    star_refine(mesh, |c, poly| Ok(centroid_checked(c, poly)?))
}

/// Splits every quadrilateral into four by joining the intersection of its diagonals to the
/// edge midpoints. A quadrilateral with a reflex or straight angle, whose diagonals do not
/// cross inside, uses the midpoint of the diagonal through that vertex instead.
pub fn refine_quads(mesh: &PolygonMesh) -> Result<PolygonMesh> {
    star_refine(mesh, |c, poly| {
        if poly.len() != 4 {
            return Err(VemError::Refinement { cell: c, msg: format!("expected a quadrilateral, found {} vertices", poly.len()) });
        }
        let eps = 1e-12;
        match segment_intersection(poly[0], poly[2], poly[1], poly[3]) {
            Some((t, u, p)) if t > eps && t < 1.0 - eps && u > eps && u < 1.0 - eps => Ok(p),
            _ => {
                let turn = |i: usize| (poly[i] - poly[(i + 3) % 4]).cross(poly[(i + 1) % 4] - poly[i]);
                let r = (0..4).min_by(|&a, &b| turn(a).total_cmp(&turn(b))).unwrap_or(0);
                Ok(poly[r].midpoint(poly[(r + 2) % 4]))
            }
        }
    })
}

fn centroid_checked(c: usize, poly: &[Point2]) -> Result<Point2> {
    let g = centroid(poly);
    if !crate::geometry::point_in_polygon(g, poly, 0.0) {
        return Err(VemError::Refinement { cell: c, msg: "barycentre lies outside the cell".into() });
    }
    Ok(g)
}

/// Shared driver: vertices are ordered old vertices, edge midpoints (edge order), cell
/// centres (cell order); the quad of local vertex `i` is `(v_i, M_i, center, M_{i-1})`.
fn star_refine(mesh: &PolygonMesh, center_of: impl Fn(usize, &[Point2]) -> Result<Point2>) -> Result<PolygonMesh> {
    let topo = Topology::build(mesh)?;
    let nv = mesh.n_vertices();
    let ne = topo.n_edges();
    let mut vertices = mesh.vertices.clone();
    vertices.reserve(ne + mesh.n_cells());
    for e in &topo.edges {
        vertices.push(mesh.vertices[e.v0].midpoint(mesh.vertices[e.v1]));
    }
    let mut cells = Vec::new();
    let mut parents = Vec::new();
    for (c, cell) in mesh.cells.iter().enumerate() {
        let poly = mesh.cell_polygon(c);
        let center = center_of(c, &poly)?;
        let ci = vertices.len();
        vertices.push(center);
        let n = cell.len();
        for i in 0..n {
            let mi = nv + topo.cell_edges[c][i];
            let mprev = nv + topo.cell_edges[c][(i + n - 1) % n];
            let quad = vec![cell[i], mi, ci, mprev];
            let q: Vec<Point2> = quad.iter().map(|&v| vertices[v]).collect();
            // both triangles of the split along v_i-center must be positively oriented
            let t1 = signed_area(&[q[0], q[1], q[2]]);
            let t2 = signed_area(&[q[0], q[2], q[3]]);
            if t1 <= 0.0 || t2 <= 0.0 {
                return Err(VemError::Refinement { cell: c, msg: format!("sub-quadrilateral {i} is degenerate") });
            }
            cells.push(quad);
            parents.push(c);
        }
    }

    let edge_of: HashMap<(usize, usize), usize> = topo
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| ((e.v0.min(e.v1), e.v0.max(e.v1)), i))
        .collect();
    let boundary_loops = mesh
        .boundary_loops
        .iter()
        .map(|l| {
            let n = l.vertices.len();
            let mut v = Vec::with_capacity(2 * n);
            for i in 0..n {
                let (a, b) = (l.vertices[i], l.vertices[(i + 1) % n]);
                v.push(a);
                v.push(nv + edge_of[&(a.min(b), a.max(b))]);
            }
            BoundaryLoop { label: l.label, vertices: v }
        })
        .collect();
    Ok(PolygonMesh {
        vertices,
        cells,
        boundary_loops,
        parent_of_cell: Some(parents),
        level: mesh.level + 1,
    })
}
