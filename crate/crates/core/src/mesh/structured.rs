use std::collections::HashMap;

use super::PolygonMesh;
use crate::error::{Result, VemError};
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum DualVertex {
    /// Barycentre of triangle `(i, j, upper)` of square `[i,i+1]×[j,j+1]`.
    Tri(usize, usize, bool),
    /// Midpoint of a boundary edge between two primal vertices.
    Mid(usize, usize),
    /// A primal vertex on the boundary.
    Primal(usize),
}

/// Barycentric dual of the uniform `n×n` right-triangle mesh of `(0,1)²` (each square split
/// along its `(0,0)-(1,1)` diagonal). Cells surround primal vertices; boundary cells are closed
/// with boundary-edge midpoints and the primal vertex itself. Interior cells are hexagons and
/// the mesh size is `h = √20/(3n)`.
pub fn gen_structured_voronoi(n: usize) -> Result<PolygonMesh> {
    if n < 2 {
        return Err(VemError::Generation("structured mesh needs n >= 2".into()));
    }
    let hgrid = 1.0 / n as f64;
    let pid = |i: usize, j: usize| j * (n + 1) + i;
    let ppos = |i: usize, j: usize| Point2::new(i as f64 * hgrid, j as f64 * hgrid);

    // incident triangles of every primal vertex
    let mut incident: Vec<Vec<DualVertex>> = vec![Vec::new(); (n + 1) * (n + 1)];
    for j in 0..n {
        for i in 0..n {
            // lower: (i,j) (i+1,j) (i+1,j+1); upper: (i,j) (i+1,j+1) (i,j+1)
            for (v, t) in [(pid(i, j), false), (pid(i + 1, j), false), (pid(i + 1, j + 1), false)] {
                incident[v].push(DualVertex::Tri(i, j, t));
            }
            for (v, t) in [(pid(i, j), true), (pid(i + 1, j + 1), true), (pid(i, j + 1), true)] {
                incident[v].push(DualVertex::Tri(i, j, t));
            }
        }
    }

    let position = |d: DualVertex| -> Point2 {
        match d {
            DualVertex::Tri(i, j, upper) => {
                let (a, b, c) = if upper {
                    (ppos(i, j), ppos(i + 1, j + 1), ppos(i, j + 1))
                } else {
                    (ppos(i, j), ppos(i + 1, j), ppos(i + 1, j + 1))
                };
                Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
            }
            DualVertex::Mid(a, b) => {
                let pa = ppos(a % (n + 1), a / (n + 1));
                let pb = ppos(b % (n + 1), b / (n + 1));
                pa.midpoint(pb)
            }
            DualVertex::Primal(a) => ppos(a % (n + 1), a / (n + 1)),
        }
    };

    let mut ids: HashMap<DualVertex, usize> = HashMap::new();
    let mut vertices: Vec<Point2> = Vec::new();
    let mut cells = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let p = ppos(i, j);
            let on_left = i == 0;
            let on_right = i == n;
            let on_bottom = j == 0;
            let on_top = j == n;
            let boundary = on_left || on_right || on_bottom || on_top;
            let mut ring: Vec<DualVertex> = incident[pid(i, j)].clone();
            let cell_dual: Vec<DualVertex> = if boundary {
                let mut inward = Point2::new(0.0, 0.0);
                if on_left {
                    inward.x += 1.0;
                }
                if on_right {
                    inward.x -= 1.0;
                }
                if on_bottom {
                    inward.y += 1.0;
                }
                if on_top {
                    inward.y -= 1.0;
                }
                let key = |a: usize, b: usize| DualVertex::Mid(a.min(b), a.max(b));
                if on_bottom || on_top {
                    if i > 0 {
                        ring.push(key(pid(i, j), pid(i - 1, j)));
                    }
                    if i < n {
                        ring.push(key(pid(i, j), pid(i + 1, j)));
                    }
                }
                if on_left || on_right {
                    if j > 0 {
                        ring.push(key(pid(i, j), pid(i, j - 1)));
                    }
                    if j < n {
                        ring.push(key(pid(i, j), pid(i, j + 1)));
                    }
                }
                let angle = |d: &DualVertex| {
                    let v = position(*d) - p;
                    inward.cross(v).atan2(inward.dot(v))
                };
                ring.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
                let mut c = vec![DualVertex::Primal(pid(i, j))];
                c.extend(ring);
                c
            } else {
                ring.sort_by(|a, b| {
                    let va = position(*a) - p;
                    let vb = position(*b) - p;
                    va.y.atan2(va.x).total_cmp(&vb.y.atan2(vb.x))
                });
                ring
            };
            let cell: Vec<usize> = cell_dual
                .into_iter()
                .map(|d| {
                    *ids.entry(d).or_insert_with(|| {
                        vertices.push(position(d));
                        vertices.len() - 1
                    })
                })
                .collect();
            cells.push(cell);
        }
    }
    PolygonMesh::new(vertices, cells)
}
