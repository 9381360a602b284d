use std::collections::HashMap;

use super::{BoundaryLoop, PolygonMesh, Topology};
use crate::error::{Result, VemError};
use crate::geometry::{signed_area, Point2};

#[derive(Debug, Clone, Copy)]
struct BBox {
    min: Point2,
    max: Point2,
}

impl BBox {
    fn of(points: impl Iterator<Item = Point2>) -> Self {
        let mut b = BBox {
            min: Point2::new(f64::INFINITY, f64::INFINITY),
            max: Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        for p in points {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        b
    }

    fn contains(&self, o: &BBox) -> bool {
        self.min.x <= o.min.x && self.min.y <= o.min.y && self.max.x >= o.max.x && self.max.y >= o.max.y
    }

    fn same(&self, o: &BBox) -> bool {
        self.min == o.min && self.max == o.max
    }
}

/// Groups the boundary edges into closed loops and labels them: 0 for the loop whose
/// bounding box contains all others, `1..=m` for the inner loops ordered lexicographically by
/// their smallest vertex. Each loop starts at its lexicographically smallest vertex and runs
/// with the domain on the left. Returns the Betti number `m` and the loops.
pub fn detect_boundary_loops(mesh: &PolygonMesh) -> Result<(usize, Vec<BoundaryLoop>)> {
    let topo = Topology::build(mesh)?;
    let mut next: HashMap<usize, usize> = HashMap::new();
    for (_, e) in topo.boundary_edges() {
        if next.insert(e.v0, e.v1).is_some() {
            return Err(VemError::Topology(format!(
                "boundary is pinched at vertex {} (two outgoing boundary edges)",
                e.v0
            )));
        }
    }
    let lex_min = |vs: &[usize]| -> usize {
        *vs.iter()
            .min_by(|&&a, &&b| mesh.vertices[a].lex_cmp(&mesh.vertices[b]).then(a.cmp(&b)))
            .expect("non-empty loop")
    };

    let mut starts: Vec<usize> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut visited: HashMap<usize, bool> = HashMap::new();
    let mut raw: Vec<Vec<usize>> = Vec::new();
    for s in starts {
        if visited.contains_key(&s) {
            continue;
        }
        let mut cycle = vec![s];
        visited.insert(s, true);
        let mut cur = s;
        loop {
            let nxt = *next
                .get(&cur)
                .ok_or_else(|| VemError::Topology(format!("open boundary at vertex {cur}")))?;
            if nxt == s {
                break;
            }
            if visited.contains_key(&nxt) {
                return Err(VemError::Topology(format!("boundary loop through vertex {nxt} is not closed")));
            }
            visited.insert(nxt, true);
            cycle.push(nxt);
            cur = nxt;
        }
        // rotate to start at the lexicographically smallest vertex
        let m = lex_min(&cycle);
        let pos = cycle.iter().position(|&v| v == m).unwrap();
        cycle.rotate_left(pos);
        raw.push(cycle);
    }
    if raw.is_empty() {
        return Err(VemError::Topology("mesh has no boundary".into()));
    }

    let boxes: Vec<BBox> = raw.iter().map(|l| BBox::of(l.iter().map(|&v| mesh.vertices[v]))).collect();
    for i in 0..raw.len() {
        for j in i + 1..raw.len() {
            if boxes[i].same(&boxes[j]) {
                return Err(VemError::Topology("two boundary loops share a bounding box".into()));
            }
        }
    }
    let outer = (0..raw.len())
        .find(|&i| (0..raw.len()).all(|j| boxes[i].contains(&boxes[j])))
        .ok_or_else(|| VemError::Topology("no boundary loop encloses all others".into()))?;
    let area = |l: &[usize]| signed_area(&l.iter().map(|&v| mesh.vertices[v]).collect::<Vec<_>>());
    if area(&raw[outer]) <= 0.0 {
        return Err(VemError::Topology("outer boundary loop is not counter-clockwise".into()));
    }
    let mut inner: Vec<Vec<usize>> = Vec::new();
    let mut outer_loop = Vec::new();
    for (i, l) in raw.into_iter().enumerate() {
        if i == outer {
            outer_loop = l;
        } else {
            if area(&l) >= 0.0 {
                return Err(VemError::Topology("inner boundary loop is not clockwise".into()));
            }
            inner.push(l);
        }
    }
    inner.sort_by(|a, b| mesh.vertices[a[0]].lex_cmp(&mesh.vertices[b[0]]));
    let m = inner.len();
    let mut loops = vec![BoundaryLoop { label: 0, vertices: outer_loop }];
    loops.extend(inner.into_iter().enumerate().map(|(i, v)| BoundaryLoop { label: i + 1, vertices: v }));
    Ok((m, loops))
}
