//! Polygonal meshes: storage, validation, edge topology, generation and refinement.

mod boundary;
mod cleanup;
mod io;
mod refine;
mod shape;
mod structured;
mod voronoi;

use std::collections::HashMap;

use crate::error::{Result, VemError};
use crate::geometry::{diameter, is_simple, point_in_polygon, signed_area, Point2};

pub use boundary::detect_boundary_loops;
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};
pub use refine::{refine_quads, refine_to_quads};
pub use shape::{shape_regularity, ShapeReport};
pub use structured::gen_structured_voronoi;
pub use voronoi::{gen_random_voronoi, DomainSpec, LloydOptions};

/// A closed cycle of boundary vertices. Label 0 is the outer boundary, labels `1..=m` the
/// boundaries of holes. Vertices are listed with the domain on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLoop {
    pub label: usize,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonMesh {
    pub vertices: Vec<Point2>,
    /// Counter-clockwise vertex loops.
    pub cells: Vec<Vec<usize>>,
    pub boundary_loops: Vec<BoundaryLoop>,
    /// Coarse cell of every cell, for meshes produced by refinement.
    pub parent_of_cell: Option<Vec<usize>>,
    pub level: usize,
}

/// An undirected mesh edge with its one or two adjacent cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub v0: usize,
    pub v1: usize,
    /// Cell to the left of `v0 -> v1`.
    pub left: usize,
    /// Cell on the other side, `None` on the boundary.
    pub right: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

/// Edge numbering derived from the cells: edges are numbered in order of first appearance
/// when walking cells in order and their edges counter-clockwise.
#[derive(Debug, Clone)]
pub struct Topology {
    pub edges: Vec<Edge>,
    /// Global edge index of local edge `i` (from vertex `i` to vertex `i+1`) of each cell.
    pub cell_edges: Vec<Vec<usize>>,
}

impl Topology {
    pub fn build(mesh: &PolygonMesh) -> Result<Self> {
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_edges = Vec::with_capacity(mesh.cells.len());
        for (c, cell) in mesh.cells.iter().enumerate() {
            let n = cell.len();
            let mut local = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (cell[i], cell[(i + 1) % n]);
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        lookup.insert(key, edges.len());
                        local.push(edges.len());
                        edges.push(Edge { v0: a, v1: b, left: c, right: None });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() {
                            return Err(VemError::Topology(format!(
                                "edge ({a},{b}) shared by more than two cells"
                            )));
                        }
                        if edge.v0 != b || edge.v1 != a {
                            return Err(VemError::Topology(format!(
                                "edge ({a},{b}) traversed in the same direction by cells {} and {c}",
                                edge.left
                            )));
                        }
                        edge.right = Some(c);
                        local.push(e);
                    }
                }
            }
            cell_edges.push(local);
        }
        Ok(Self { edges, cell_edges })
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.is_boundary())
    }
}

impl PolygonMesh {
    /// Builds a mesh from vertices and cells, detecting and labelling the boundary loops.
    pub fn new(vertices: Vec<Point2>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let mut mesh = Self { vertices, cells, boundary_loops: Vec::new(), parent_of_cell: None, level: 0 };
        mesh.validate_cells()?;
        let (_, loops) = detect_boundary_loops(&mesh)?;
        mesh.boundary_loops = loops;
        Ok(mesh)
    }

    /// Builds a mesh with explicitly given boundary loops, checking them against the cells.
    pub fn from_parts(
        vertices: Vec<Point2>,
        cells: Vec<Vec<usize>>,
        boundary_loops: Vec<BoundaryLoop>,
        parent_of_cell: Option<Vec<usize>>,
        level: usize,
    ) -> Result<Self> {
        let mesh = Self { vertices, cells, boundary_loops, parent_of_cell, level };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Number of inner boundary components.
    pub fn betti_number(&self) -> usize {
        self.boundary_loops.len().saturating_sub(1)
    }

    pub fn cell_polygon(&self, c: usize) -> Vec<Point2> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Mesh size: the largest cell diameter.
    pub fn h(&self) -> f64 {
        (0..self.n_cells()).map(|c| diameter(&self.cell_polygon(c))).fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        (0..self.n_cells()).map(|c| signed_area(&self.cell_polygon(c))).sum()
    }

    pub fn topology(&self) -> Result<Topology> {
        Topology::build(self)
    }

    fn validate_cells(&self) -> Result<()> {
        if let Some(i) = self.vertices.iter().position(|p| !p.is_finite()) {
            return Err(VemError::Topology(format!("vertex {i} has non-finite coordinates")));
        }
        for (c, cell) in self.cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(VemError::Topology(format!("cell {c} has fewer than 3 vertices")));
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= self.vertices.len()) {
                return Err(VemError::Topology(format!("cell {c} references missing vertex {v}")));
            }
            let mut sorted = cell.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != cell.len() {
                return Err(VemError::Topology(format!("cell {c} repeats a vertex")));
            }
            let poly = self.cell_polygon(c);
            if signed_area(&poly) <= 0.0 {
                return Err(VemError::Topology(format!("cell {c} is not counter-clockwise")));
            }
            if !is_simple(&poly) {
                return Err(VemError::Topology(format!("cell {c} is self-intersecting")));
            }
        }
        Topology::build(self)?;
        Ok(())
    }

    /// Checks every structural invariant, including that the stored boundary loops
    /// partition the boundary edges with exactly one outer loop.
    pub fn validate(&self) -> Result<()> {
        self.validate_cells()?;
        let (_, detected) = detect_boundary_loops(self)?;
        let canon = |loops: &[BoundaryLoop]| {
            let mut v: Vec<(usize, Vec<(usize, usize)>)> = loops
                .iter()
                .map(|l| {
                    let n = l.vertices.len();
                    let mut e: Vec<(usize, usize)> =
                        (0..n).map(|i| (l.vertices[i], l.vertices[(i + 1) % n])).collect();
                    e.sort_unstable();
                    (l.label, e)
                })
                .collect();
            v.sort();
            v
        };
        if canon(&self.boundary_loops) != canon(&detected) {
            return Err(VemError::Topology("boundary loops do not match the boundary edges".into()));
        }
        if let Some(p) = &self.parent_of_cell {
            if p.len() != self.cells.len() {
                return Err(VemError::Topology("parent map length differs from cell count".into()));
            }
        }
        Ok(())
    }

    /// Checks that every cell lies inside its parent cell of `coarse` (tolerance `1e-12·h`).
    pub fn check_nested_in(&self, coarse: &PolygonMesh) -> Result<()> {
        let parents = self
            .parent_of_cell
            .as_ref()
            .ok_or_else(|| VemError::Topology("mesh has no parent links".into()))?;
        let tol = 1e-12 * coarse.h();
        for (c, cell) in self.cells.iter().enumerate() {
            let parent = coarse.cell_polygon(parents[c]);
            for &v in cell {
                if !point_in_polygon(self.vertices[v], &parent, tol) {
                    return Err(VemError::Topology(format!(
                        "vertex {v} of cell {c} lies outside parent {}",
                        parents[c]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Index of a cell containing `p`, if any.
    pub fn locate(&self, p: Point2) -> Option<usize> {
        let tol = 1e-12 * self.h();
        (0..self.n_cells()).find(|&c| point_in_polygon(p, &self.cell_polygon(c), tol))
    }

    /// Boundary loop label of every vertex (`None` for interior vertices).
    pub fn vertex_loop_labels(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.n_vertices()];
        for l in &self.boundary_loops {
            for &v in &l.vertices {
                out[v] = Some(l.label);
            }
        }
        out
    }
}

/// Merges vertices closer than `tol` and drops the resulting repeated cell vertices.
/// Returns the compacted vertices and re-indexed cells.
pub(crate) fn merge_close_vertices(
    vertices: &[Point2],
    cells: &[Vec<usize>],
    tol: f64,
) -> (Vec<Point2>, Vec<Vec<usize>>) {
    let key = |p: Point2| ((p.x / tol).floor() as i64, (p.y / tol).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut out: Vec<Point2> = Vec::new();
    for (i, &p) in vertices.iter().enumerate() {
        let (kx, ky) = key(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                    for &j in list {
                        if out[j].dist(p) < tol {
                            found = Some(j);
                            break 'search;
                        }
                    }
                }
            }
        }
        remap[i] = match found {
            Some(j) => j,
            None => {
                grid.entry((kx, ky)).or_default().push(out.len());
                out.push(p);
                out.len() - 1
            }
        };
    }
    let cells = cells
        .iter()
        .map(|cell| {
            let mut c: Vec<usize> = Vec::with_capacity(cell.len());
            for &v in cell {
                let w = remap[v];
                if c.last() != Some(&w) {
                    c.push(w);
                }
            }
            while c.len() > 1 && c.first() == c.last() {
                c.pop();
            }
            c
        })
        .collect();
    (out, cells)
}

/// The single square `(0,1)²` as a one-cell mesh.
pub fn unit_square_cell() -> PolygonMesh {
    PolygonMesh::new(
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ],
        vec![vec![0, 1, 2, 3]],
    )
    .expect("unit square is valid")
}
