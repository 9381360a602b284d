//! Text mesh format, version 1:
//!
//! ```text
//! polymesh 1
//! nv nc nl
//! x y                      (nv lines)
//! m i1 ... im              (nc lines, 0-based, counter-clockwise)
//! label n j1 ... jn        (nl lines, boundary cycles, label 0 = outer)
//! level L                  (optional)
//! parents nc p1 ... pnc    (optional)
//! ```
//!
//! Tokens are whitespace separated; `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use super::{merge_close_vertices, BoundaryLoop, PolygonMesh};
use crate::error::{Result, VemError};
use crate::geometry::Point2;

const MERGE_TOL: f64 = 1e-12;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate() }
    }

    /// Next non-empty line as (1-based number, tokens).
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let content = line.split('#').next().unwrap_or("");
            let toks: Vec<&str> = content.split_whitespace().collect();
            if !toks.is_empty() {
                return Some((i + 1, toks));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        self.next_tokens().ok_or_else(|| VemError::Parse { line: 0, msg: format!("unexpected end of file, expected {what}") })
    }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| VemError::Parse { line, msg: format!("invalid number '{tok}'") })
}

pub fn parse_mesh(text: &str) -> Result<PolygonMesh> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.expect("header")?;
    if head != ["polymesh", "1"] {
        return Err(VemError::Parse { line: ln, msg: "expected header 'polymesh 1'".into() });
    }
    let (ln, counts) = lines.expect("counts")?;
    if counts.len() != 3 {
        return Err(VemError::Parse { line: ln, msg: "expected 'nv nc nl'".into() });
    }
    let nv: usize = num(counts[0], ln)?;
    let nc: usize = num(counts[1], ln)?;
    let nl: usize = num(counts[2], ln)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, t) = lines.expect("vertex")?;
        if t.len() != 2 {
            return Err(VemError::Parse { line: ln, msg: "vertex line needs 'x y'".into() });
        }
        vertices.push(Point2::new(num(t[0], ln)?, num(t[1], ln)?));
    }
    let read_cycle = |ln: usize, t: &[&str], offset: usize| -> Result<Vec<usize>> {
        let m: usize = num(t[offset], ln)?;
        if t.len() != offset + 1 + m {
            return Err(VemError::Parse { line: ln, msg: format!("expected {m} indices") });
        }
        let idx: Vec<usize> = t[offset + 1..].iter().map(|s| num(s, ln)).collect::<Result<_>>()?;
        if let Some(&bad) = idx.iter().find(|&&i| i >= nv) {
            return Err(VemError::Parse { line: ln, msg: format!("vertex index {bad} out of range (nv = {nv})") });
        }
        Ok(idx)
    };
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, t) = lines.expect("cell")?;
        cells.push(read_cycle(ln, &t, 0)?);
    }
    let mut loops = Vec::with_capacity(nl);
    for _ in 0..nl {
        let (ln, t) = lines.expect("boundary loop")?;
        if t.len() < 2 {
            return Err(VemError::Parse { line: ln, msg: "boundary line needs 'label n ...'".into() });
        }
        loops.push(BoundaryLoop { label: num(t[0], ln)?, vertices: read_cycle(ln, &t, 1)? });
    }
    let mut level = 0;
    let mut parents = None;
    while let Some((ln, t)) = lines.next_tokens() {
        match t[0] {
            "level" if t.len() == 2 => level = num(t[1], ln)?,
            "parents" if t.len() >= 2 => {
                let n: usize = num(t[1], ln)?;
                if n != nc || t.len() != n + 2 {
                    return Err(VemError::Parse { line: ln, msg: "parents record must list one entry per cell".into() });
                }
                parents = Some(t[2..].iter().map(|s| num(s, ln)).collect::<Result<Vec<usize>>>()?);
            }
            _ => return Err(VemError::Parse { line: ln, msg: format!("unexpected record '{}'", t[0]) }),
        }
    }

    let (vertices, cells, loops) = merge_on_load(vertices, cells, loops);
    PolygonMesh::from_parts(vertices, cells, loops, parents, level)
}

fn merge_on_load(
    vertices: Vec<Point2>,
    cells: Vec<Vec<usize>>,
    loops: Vec<BoundaryLoop>,
) -> (Vec<Point2>, Vec<Vec<usize>>, Vec<BoundaryLoop>) {
    let n = vertices.len();
    // pack loops as extra "cells" so they are re-indexed consistently
    let mut all = cells.clone();
    all.extend(loops.iter().map(|l| l.vertices.clone()));
    let (merged, all) = merge_close_vertices(&vertices, &all, MERGE_TOL);
    if merged.len() == n {
        return (vertices, cells, loops);
    }
    let nc = cells.len();
    let loops = loops
        .iter()
        .zip(&all[nc..])
        .map(|(l, v)| BoundaryLoop { label: l.label, vertices: v.clone() })
        .collect();
    (merged, all[..nc].to_vec(), loops)
}

pub fn write_mesh(mesh: &PolygonMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "polymesh 1");
    let _ = writeln!(s, "{} {} {}", mesh.n_vertices(), mesh.n_cells(), mesh.boundary_loops.len());
    for p in &mesh.vertices {
        // shortest representation that round-trips exactly
        let _ = writeln!(s, "{:?} {:?}", p.x, p.y);
    }
    let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    for c in &mesh.cells {
        let _ = writeln!(s, "{} {}", c.len(), join(c));
    }
    for l in &mesh.boundary_loops {
        let _ = writeln!(s, "{} {} {}", l.label, l.vertices.len(), join(&l.vertices));
    }
    if mesh.level != 0 {
        let _ = writeln!(s, "level {}", mesh.level);
    }
    if let Some(p) = &mesh.parent_of_cell {
        let _ = writeln!(s, "parents {} {}", p.len(), join(p));
    }
    s
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolygonMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| with_path(path, e))?;
    parse_mesh(&text)
}

pub fn save_mesh(mesh: &PolygonMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_mesh(mesh)).map_err(|e| with_path(path, e))
}

fn with_path(path: &Path, e: std::io::Error) -> VemError {
    std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_square_cell;

    #[test]
    fn single_square_file() {
        let text = "polymesh 1\n# unit square\n4 1 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3\n0 4 0 1 2 3\n";
        let m = parse_mesh(text).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.boundary_loops.len(), 1);
        assert_eq!(m.boundary_loops[0].label, 0);
    }

    #[test]
    fn out_of_range_index_is_parse_error() {
        let text = "polymesh 1\n4 1 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 4\n0 4 0 1 2 3\n";
        assert!(matches!(parse_mesh(text), Err(VemError::Parse { .. })));
    }

    #[test]
    fn round_trip_is_identity() {
        let m = unit_square_cell();
        let m2 = parse_mesh(&write_mesh(&m)).unwrap();
        assert_eq!(m, m2);
    }

    #[test]
    fn near_duplicate_vertices_are_merged() {
        let text = "polymesh 1\n5 1 1\n0 0\n1 0\n1 1\n0 1\n1e-14 0\n4 0 1 2 3\n0 4 0 1 2 3\n";
        let m = parse_mesh(text).unwrap();
        assert_eq!(m.n_vertices(), 4);
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(parse_mesh("polymesh 2\n").is_err());
    }
}
