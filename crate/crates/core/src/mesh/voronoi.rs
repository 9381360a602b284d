use std::collections::HashMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cleanup::{collapse_short_edges, split_reflex_cells};
use super::{merge_close_vertices, PolygonMesh};
use crate::error::{Result, VemError};
use crate::geometry::{
    centroid, clip_half_plane, diameter, point_in_polygon, point_segment_distance, signed_area, HalfPlane, Point2,
};

/// Domain of a random Voronoi mesh: a convex outer polygon minus convex holes. A hole may
/// touch or cross the outer boundary, in which case it cuts a notch instead of a hole.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    /// `(0,1)²`.
    UnitSquare,
    /// `(-1,1)² \ [0,1]×[-1,0]`.
    GammaShape,
    /// `(0,1)² \ [1/4,3/4]²`.
    SquareWithHole,
    /// `(0,1)²` minus `[0.15,0.45]²` and `[0.55,0.85]²`.
    TwoHoles,
    /// Convex counter-clockwise outer polygon and convex counter-clockwise holes.
    Polygon { outer: Vec<Point2>, holes: Vec<Vec<Point2>> },
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point2> {
    vec![Point2::new(x0, y0), Point2::new(x1, y0), Point2::new(x1, y1), Point2::new(x0, y1)]
}

impl DomainSpec {
    pub fn outer(&self) -> Vec<Point2> {
        match self {
            DomainSpec::GammaShape => rect(-1.0, -1.0, 1.0, 1.0),
            DomainSpec::Polygon { outer, .. } => outer.clone(),
            _ => rect(0.0, 0.0, 1.0, 1.0),
        }
    }

    pub fn holes(&self) -> Vec<Vec<Point2>> {
        match self {
            DomainSpec::UnitSquare => Vec::new(),
            DomainSpec::GammaShape => vec![rect(0.0, -1.0, 1.0, 0.0)],
            DomainSpec::SquareWithHole => vec![rect(0.25, 0.25, 0.75, 0.75)],
            DomainSpec::TwoHoles => vec![rect(0.15, 0.15, 0.45, 0.45), rect(0.55, 0.55, 0.85, 0.85)],
            DomainSpec::Polygon { holes, .. } => holes.clone(),
        }
    }

    /// Number of holes lying strictly inside the outer polygon (the Betti number).
    pub fn betti_number(&self) -> usize {
        let outer = self.outer();
        self.holes()
            .iter()
            .filter(|h| h.iter().all(|&p| point_in_polygon(p, &outer, 0.0) && !on_boundary(p, &outer)))
            .count()
    }

    pub fn area(&self) -> f64 {
        let outer = self.outer();
        let mut a = signed_area(&outer);
        for h in self.holes() {
            a -= clip_convex(&h, &outer).map(|p| signed_area(&p)).unwrap_or(0.0);
        }
        a
    }

    /// Whether `p` lies in the open domain.
    pub fn contains(&self, p: Point2) -> bool {
        let outer = self.outer();
        point_in_polygon(p, &outer, 0.0)
            && !on_boundary(p, &outer)
            && self.holes().iter().all(|h| !point_in_polygon(p, h, 0.0))
    }

    fn check(&self) -> Result<()> {
        let convex_ccw = |p: &[Point2]| {
            p.len() >= 3
                && p.iter().all(|q| q.is_finite())
                && (0..p.len()).all(|i| {
                    let (a, b, c) = (p[i], p[(i + 1) % p.len()], p[(i + 2) % p.len()]);
                    (b - a).cross(c - b) > 0.0
                })
        };
        if !convex_ccw(&self.outer()) || !self.holes().iter().all(|h| convex_ccw(h)) {
            return Err(VemError::Generation("domain polygons must be convex and counter-clockwise".into()));
        }
        Ok(())
    }
}

fn on_boundary(p: Point2, poly: &[Point2]) -> bool {
    let n = poly.len();
    (0..n).any(|i| point_segment_distance(p, poly[i], poly[(i + 1) % n]) == 0.0)
}

/// Lloyd relaxation control: iterate until the largest seed movement drops below
/// `tol · h` or `max_iters` sweeps have been made.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LloydOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LloydOptions {
    fn default() -> Self {
        Self { max_iters: 100, tol: 1e-3 }
    }
}

/// Edges shorter than this fraction of their cells' diameter are collapsed.
pub const SHORT_EDGE_RATIO: f64 = 0.1;

/// Voronoi diagram of `n_seeds` Lloyd-relaxed random seeds, clipped to `domain`. Short edges
/// are collapsed and cells with a reflex corner are split. The result depends only on the
/// arguments.
pub fn gen_random_voronoi(domain: &DomainSpec, n_seeds: usize, seed: u64, lloyd: LloydOptions) -> Result<PolygonMesh> {
    if n_seeds < 4 {
        return Err(VemError::Generation("at least 4 seeds are required".into()));
    }
    domain.check()?;
    let outer = domain.outer();
    let holes = domain.holes();
    let size = diameter(&outer);
    let tol = 1e-10 * size;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = bbox(&outer);
    let mut seeds = Vec::with_capacity(n_seeds);
    let mut attempts = 0usize;
    while seeds.len() < n_seeds {
        attempts += 1;
        if attempts > 1000 * n_seeds {
            return Err(VemError::Generation("could not place seeds inside the domain".into()));
        }
        let p = Point2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if domain.contains(p) {
            seeds.push(p);
        }
    }

    let mut regions = voronoi_regions(&seeds, &outer, &holes, tol)?;
    for _ in 0..lloyd.max_iters {
        let h = regions.iter().flatten().map(|p| diameter(p)).fold(0.0, f64::max);
        let mut moved: f64 = 0.0;
        for (s, reg) in seeds.iter_mut().zip(&regions) {
            let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
            for p in reg {
                let (ap, cp) = (signed_area(p), centroid(p));
                a += ap;
                cx += ap * cp.x;
                cy += ap * cp.y;
            }
            let c = Point2::new(cx / a, cy / a);
            if a > 0.0 && domain.contains(c) {
                moved = moved.max(c.dist(*s));
                *s = c;
            }
        }
        regions = voronoi_regions(&seeds, &outer, &holes, tol)?;
        if moved < lloyd.tol * h {
            break;
        }
    }

    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    for reg in regions.iter() {
        for p in reg {
            cells.push((vertices.len()..vertices.len() + p.len()).collect::<Vec<_>>());
            vertices.extend_from_slice(p);
        }
    }
    if (cells.len() as f64) < 0.9 * n_seeds as f64 {
        return Err(VemError::Generation(format!("only {} cells for {n_seeds} seeds", cells.len())));
    }
    let (vertices, cells) = merge_close_vertices(&vertices, &cells, tol);
    let cells = drop_artifact_vertices(&vertices, cells, tol);
    let (mut vertices, mut cells) = compact(vertices, cells);
    for _ in 0..3 {
        collapse_short_edges(&mut vertices, &mut cells, SHORT_EDGE_RATIO, tol);
        cells.retain(|c| !c.is_empty());
        let before = cells.len();
        split_reflex_cells(&mut vertices, &mut cells, 1e-9);
        if cells.len() == before {
            break;
        }
    }
    let (vertices, cells) = compact(vertices, cells);
    if let Some(c) = cells.iter().position(|c| c.len() < 3) {
        return Err(VemError::Generation(format!("cell {c} collapsed during vertex merging")));
    }
    let mesh = PolygonMesh::new(vertices, cells).map_err(|e| VemError::Generation(e.to_string()))?;
    if mesh.boundary_loops.len() != domain.betti_number() + 1 {
        return Err(VemError::Generation(format!(
            "mesh has {} boundary loops, domain expects {}",
            mesh.boundary_loops.len(),
            domain.betti_number() + 1
        )));
    }
    Ok(mesh)
}

fn bbox(poly: &[Point2]) -> (Point2, Point2) {
    let mut lo = poly[0];
    let mut hi = poly[0];
    for p in poly {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

/// Drops consecutive points closer than `tol`.
fn dedupe(poly: Vec<Point2>, tol: f64) -> Vec<Point2> {
    let mut out: Vec<Point2> = Vec::with_capacity(poly.len());
    for p in poly {
        if out.last().is_none_or(|q| q.dist(p) >= tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(out[out.len() - 1]) < tol {
        out.pop();
    }
    out
}

fn clip_convex(poly: &[Point2], by: &[Point2]) -> Option<Vec<Point2>> {
    let mut p = poly.to_vec();
    for i in 0..by.len() {
        p = clip_half_plane(&p, &HalfPlane::left_of(by[i], by[(i + 1) % by.len()]));
        if p.len() < 3 {
            return None;
        }
    }
    Some(p)
}

/// Each seed's Voronoi cell intersected with the domain, as one or more CCW polygons.
fn voronoi_regions(seeds: &[Point2], outer: &[Point2], holes: &[Vec<Point2>], tol: f64) -> Result<Vec<Vec<Vec<Point2>>>> {
    use rayon::prelude::*;
    seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut cell = outer.to_vec();
            let mut order: Vec<usize> = (0..seeds.len()).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| s.dist(seeds[a]).total_cmp(&s.dist(seeds[b])));
            for j in order {
                let t = seeds[j];
                // bisectors farther than twice the cell radius cannot cut the cell
                let r = cell.iter().map(|p| p.dist(s)).fold(0.0, f64::max);
                if s.dist(t) > 2.0 * r {
                    break;
                }
                let hp = HalfPlane::new(2.0 * (t - s), t.dot(t) - s.dot(s));
                cell = dedupe(clip_half_plane(&cell, &hp), tol);
                if cell.len() < 3 {
                    return Err(VemError::Generation(format!("seed {i} has an empty Voronoi cell")));
                }
            }
            let mut pieces = vec![cell];
            for h in holes {
                pieces = pieces.iter().flat_map(|p| subtract_convex(p, h, tol)).collect();
            }
            if pieces.is_empty() {
                return Err(VemError::Generation(format!("Voronoi cell of seed {i} lies inside a hole")));
            }
            if pieces.len() == 1 {
                return Ok(pieces);
            }
            union_pieces(&pieces, tol).map_err(|e| VemError::Generation(format!("seed {i}: {e}")))
        })
        .collect()
}

/// Convex pieces covering `poly` minus the convex polygon `hole`: the piece for edge `e_i` of
/// the hole is the part outside `e_i` and inside all earlier edges.
fn subtract_convex(poly: &[Point2], hole: &[Point2], tol: f64) -> Vec<Vec<Point2>> {
    let n = hole.len();
    let area_tol = tol * tol;
    let mut out = Vec::new();
    let mut rest = poly.to_vec();
    for i in 0..n {
        let hp = HalfPlane::left_of(hole[i], hole[(i + 1) % n]);
        let piece = dedupe(clip_half_plane(&rest, &hp.flipped()), tol);
        if piece.len() >= 3 && signed_area(&piece) > area_tol {
            out.push(piece);
        }
        rest = dedupe(clip_half_plane(&rest, &hp), tol);
        if rest.len() < 3 || signed_area(&rest) <= area_tol {
            break;
        }
    }
    out
}

/// Union of convex CCW pieces with matching shared edges, by cancelling opposite edges.
fn union_pieces(pieces: &[Vec<Point2>], tol: f64) -> Result<Vec<Vec<Point2>>> {
    let mut pts: Vec<Point2> = Vec::new();
    let index = |p: Point2, pts: &mut Vec<Point2>| -> usize {
        match pts.iter().position(|q| q.dist(p) < tol) {
            Some(i) => i,
            None => {
                pts.push(p);
                pts.len() - 1
            }
        }
    };
    let loops: Vec<Vec<usize>> = pieces.iter().map(|p| p.iter().map(|&q| index(q, &mut pts)).collect()).collect();
    let mut count: HashMap<(usize, usize), i64> = HashMap::new();
    let mut order: Vec<(usize, usize)> = Vec::new();
    for l in &loops {
        let n = l.len();
        for k in 0..n {
            let (a, b) = (l[k], l[(k + 1) % n]);
            // split at points lying on the edge
            let (pa, pb) = (pts[a], pts[b]);
            let d = pb - pa;
            let mut inner: Vec<(f64, usize)> = (0..pts.len())
                .filter(|&v| v != a && v != b && point_segment_distance(pts[v], pa, pb) < tol)
                .map(|v| ((pts[v] - pa).dot(d) / d.dot(d), v))
                .collect();
            inner.sort_by(|x, y| x.0.total_cmp(&y.0));
            let chain: Vec<usize> = std::iter::once(a).chain(inner.into_iter().map(|x| x.1)).chain(std::iter::once(b)).collect();
            for w in chain.windows(2) {
                let e = (w[0], w[1]);
                let r = (w[1], w[0]);
                if let Some(c) = count.get_mut(&r).filter(|c| **c > 0) {
                    *c -= 1;
                } else {
                    *count.entry(e).or_insert(0) += 1;
                    order.push(e);
                }
            }
        }
    }
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut starts = Vec::new();
    for e in order {
        if let Some(c) = count.get_mut(&e) {
            if *c > 0 {
                *c -= 1;
                if next.insert(e.0, e.1).is_some() {
                    return Err(VemError::Generation("pieces touch at a single point".into()));
                }
                starts.push(e.0);
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; pts.len()];
    for s in starts {
        if used[s] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut cur = s;
        while !used[cur] {
            used[cur] = true;
            cycle.push(pts[cur]);
            cur = *next.get(&cur).ok_or_else(|| VemError::Generation("open loop in cell union".into()))?;
        }
        if cur != s {
            return Err(VemError::Generation("malformed loop in cell union".into()));
        }
        if signed_area(&cycle) <= 0.0 {
            return Err(VemError::Generation("a cell encloses a hole; use more seeds".into()));
        }
        out.push(cycle);
    }
    Ok(out)
}

/// Removes vertices that belong to a single cell and lie on a straight line between its
/// neighbours; these come from clipping and would leave hanging nodes.
fn drop_artifact_vertices(vertices: &[Point2], cells: Vec<Vec<usize>>, tol: f64) -> Vec<Vec<usize>> {
    let mut incidence = vec![0usize; vertices.len()];
    for c in &cells {
        for &v in c {
            incidence[v] += 1;
        }
    }
    cells
        .into_iter()
        .map(|c| {
            let mut c = c;
            loop {
                let n = c.len();
                let pos = (0..n).find(|&i| {
                    let (a, b, d) = (vertices[c[(i + n - 1) % n]], vertices[c[i]], vertices[c[(i + 1) % n]]);
                    incidence[c[i]] == 1 && n > 3 && (b - a).cross(d - b).abs() <= tol * a.dist(d)
                });
                match pos {
                    Some(i) => {
                        c.remove(i);
                    }
                    None => break c,
                }
            }
        })
        .collect()
}

/// Drops unreferenced vertices, numbering the rest by first use.
fn compact(vertices: Vec<Point2>, cells: Vec<Vec<usize>>) -> (Vec<Point2>, Vec<Vec<usize>>) {
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut out = Vec::new();
    let cells = cells
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|v| {
                    if remap[v] == usize::MAX {
                        remap[v] = out.len();
                        out.push(vertices[v]);
                    }
                    remap[v]
                })
                .collect()
        })
        .collect();
    (out, cells)
}
