//! Post-processing of generated polygon meshes: short-edge collapse and convex splitting of
//! cells with reflex corners.

use std::collections::HashMap;

use crate::geometry::{diameter, is_simple, segment_intersection, signed_area, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Interior,
    /// On the boundary with collinear boundary neighbours.
    Boundary,
    /// A boundary corner; never moved.
    Corner,
}

fn polygon(vertices: &[Point2], cell: &[usize]) -> Vec<Point2> {
    cell.iter().map(|&v| vertices[v]).collect()
}

fn roles(vertices: &[Point2], cells: &[Vec<usize>], tol: f64) -> (Vec<Role>, HashMap<(usize, usize), usize>) {
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for c in cells {
        let n = c.len();
        for i in 0..n {
            let (a, b) = (c[i], c[(i + 1) % n]);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (&(a, b), &k) in &count {
        if k == 1 {
            nbrs[a].push(b);
            nbrs[b].push(a);
        }
    }
    let role = nbrs
        .iter()
        .enumerate()
        .map(|(v, nb)| match nb.as_slice() {
            [] => Role::Interior,
            [a, b] => {
                let (p, q, r) = (vertices[*a], vertices[v], vertices[*b]);
                if (q - p).cross(r - q).abs() <= tol * p.dist(r) {
                    Role::Boundary
                } else {
                    Role::Corner
                }
            }
            _ => Role::Corner,
        })
        .collect();
    (role, count)
}

fn relabel(cell: &[usize], from: usize, to: usize) -> Vec<usize> {
    let mut c: Vec<usize> = Vec::with_capacity(cell.len());
    for &v in cell {
        let w = if v == from { to } else { v };
        if c.last() != Some(&w) {
            c.push(w);
        }
    }
    while c.len() > 1 && c.first() == c.last() {
        c.pop();
    }
    c
}

/// Collapses every edge shorter than `ratio` times the smaller diameter of its cells, as long
/// as the boundary shape is kept. Corners stay in place, boundary vertices only move along
/// their boundary line. A sliver triangle on the collapsed edge is removed (left empty) when
/// its other two edges are not both on the boundary.
pub(crate) fn collapse_short_edges(vertices: &mut [Point2], cells: &mut [Vec<usize>], ratio: f64, tol: f64) {
    let (role, count) = roles(vertices, cells, tol);
    let mut role = role;
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (c, cell) in cells.iter().enumerate() {
        for &v in cell {
            incident[v].push(c);
        }
    }
    let diam: Vec<f64> = cells.iter().map(|c| diameter(&polygon(vertices, c))).collect();
    let mut edges: Vec<(f64, usize, usize)> = count
        .keys()
        .map(|&(a, b)| (vertices[a].dist(vertices[b]), a, b))
        .filter(|&(len, a, b)| {
            let dmin = incident[a].iter().filter(|c| incident[b].contains(c)).map(|&c| diam[c]).fold(f64::INFINITY, f64::min);
            len < ratio * dmin
        })
        .collect();
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut alive = vec![true; vertices.len()];
    for (_, a, b) in edges {
        if !alive[a] || !alive[b] {
            continue;
        }
        let shared: Vec<usize> = incident[a].iter().copied().filter(|&c| incident[b].contains(&c) && !cells[c].is_empty()).collect();
        let is_edge = shared.iter().any(|&c| {
            let cell = &cells[c];
            let n = cell.len();
            (0..n).any(|i| {
                let (p, q) = (cell[i], cell[(i + 1) % n]);
                (p, q) == (a, b) || (p, q) == (b, a)
            })
        });
        if !is_edge {
            continue;
        }
        let boundary_edge = shared.len() == 1;
        let (keep, drop, pos) = match (role[a], role[b]) {
            (Role::Corner, Role::Corner) => continue,
            (Role::Corner, Role::Boundary) | (Role::Boundary, Role::Corner) if !boundary_edge => continue,
            (Role::Boundary, Role::Boundary) if !boundary_edge => continue,
            (Role::Corner, _) => (a, b, vertices[a]),
            (_, Role::Corner) => (b, a, vertices[b]),
            (Role::Boundary, Role::Interior) => (a, b, vertices[a]),
            (Role::Interior, Role::Boundary) => (b, a, vertices[b]),
            _ => (a, b, vertices[a].midpoint(vertices[b])),
        };
        let mut affected: Vec<usize> = incident[a].iter().chain(&incident[b]).copied().collect();
        affected.sort_unstable();
        affected.dedup();
        affected.retain(|&c| !cells[c].is_empty());
        let mut trial = vertices.to_vec();
        trial[keep] = pos;
        let updated: Vec<(usize, Vec<usize>)> = affected.iter().map(|&c| (c, relabel(&cells[c], drop, keep))).collect();
        let removable = |c: usize| {
            let cell = &cells[c];
            cell.len() == 3 && shared.contains(&c) && {
                let other = cell.iter().copied().find(|&v| v != a && v != b).unwrap_or(a);
                let on_boundary = |u: usize| count.get(&(u.min(other), u.max(other))) == Some(&1);
                !(on_boundary(a) && on_boundary(b))
            }
        };
        let ok = updated.iter().all(|(c, cell)| {
            if cell.len() < 3 {
                return removable(*c);
            }
            let p = polygon(&trial, cell);
            signed_area(&p) > 0.0 && is_simple(&p)
        }) && updated.iter().any(|(_, cell)| cell.len() >= 3);
        if !ok {
            continue;
        }
        vertices[keep] = pos;
        for (c, cell) in updated {
            cells[c] = if cell.len() < 3 { Vec::new() } else { cell };
        }
        alive[drop] = false;
        let moved = std::mem::take(&mut incident[drop]);
        for c in moved {
            if !incident[keep].contains(&c) {
                incident[keep].push(c);
            }
        }
        role[keep] = if role[a] == Role::Corner || role[b] == Role::Corner {
            Role::Corner
        } else if role[a] == Role::Boundary || role[b] == Role::Boundary {
            Role::Boundary
        } else {
            Role::Interior
        };
    }
}

fn turn(p: &[Point2], i: usize) -> f64 {
    let n = p.len();
    (p[i] - p[(i + n - 1) % n]).cross(p[(i + 1) % n] - p[i])
}

fn angle(u: Point2, v: Point2) -> f64 {
    // counter-clockwise angle from u to v in [0, 2π)
    let a = u.cross(v).atan2(u.dot(v));
    if a < 0.0 {
        a + 2.0 * std::f64::consts::PI
    } else {
        a
    }
}

fn segment_inside(p: &[Point2], i: usize, j: usize) -> bool {
    let n = p.len();
    for e in 0..n {
        let f = (e + 1) % n;
        if e == i || f == i || e == j || f == j {
            continue;
        }
        if segment_intersection(p[i], p[j], p[e], p[f]).is_some_and(|(t, u, _)| (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)) {
            return false;
        }
    }
    true
}

/// Splits cells with reflex corners into convex-at-that-corner pieces, cutting along a
/// diagonal when one fits, otherwise along the angle bisector (the hit point is inserted in
/// the neighbouring cell as well).
pub(crate) fn split_reflex_cells(vertices: &mut Vec<Point2>, cells: &mut Vec<Vec<usize>>, tol: f64) {
    let pi = std::f64::consts::PI;
    let mut c = 0;
    while c < cells.len() {
        let p = polygon(vertices, &cells[c]);
        let n = p.len();
        let scale = diameter(&p);
        let Some(r) = (0..n).filter(|&i| turn(&p, i) < -tol * scale * scale).min_by(|&x, &y| turn(&p, x).total_cmp(&turn(&p, y))) else {
            c += 1;
            continue;
        };
        // interior angle at r, measured from the outgoing edge to the incoming one
        let out_dir = p[(r + 1) % n] - p[r];
        let in_dir = p[(r + n - 1) % n] - p[r];
        let theta = angle(out_dir, in_dir);
        let lo = theta - pi;
        let best = (0..n)
            .filter(|&j| j != r && j != (r + 1) % n && j != (r + n - 1) % n)
            .filter_map(|j| {
                let a = angle(out_dir, p[j] - p[r]);
                (a > lo + 0.05 && a < pi - 0.05 && segment_inside(&p, r, j)).then_some((j, (a - theta / 2.0).abs()))
            })
            .min_by(|x, y| x.1.total_cmp(&y.1));
        let cell = cells[c].clone();
        let (first, second) = if let Some((j, _)) = best {
            cut(&cell, r, j)
        } else {
            let dir = {
                let (s, co) = (theta / 2.0).sin_cos();
                let d = Point2::new(out_dir.x / out_dir.norm(), out_dir.y / out_dir.norm());
                Point2::new(co * d.x - s * d.y, s * d.x + co * d.y)
            };
            let far = Point2::new(p[r].x + 2.0 * scale * dir.x, p[r].y + 2.0 * scale * dir.y);
            let hit = (0..n)
                .filter(|&e| e != r && (e + 1) % n != r)
                .filter_map(|e| {
                    segment_intersection(p[r], far, p[e], p[(e + 1) % n])
                        .filter(|(t, u, _)| *t > 0.0 && (0.0..=1.0).contains(u))
                        .map(|(t, _, x)| (t, e, x))
                })
                .min_by(|x, y| x.0.total_cmp(&y.0));
            let Some((_, e, x)) = hit else {
                c += 1;
                continue;
            };
            let (va, vb) = (cell[e], cell[(e + 1) % n]);
            let new_v = vertices.len();
            vertices.push(x);
            for other in cells.iter_mut() {
                let m = other.len();
                if let Some(k) = (0..m).find(|&k| other[k] == vb && other[(k + 1) % m] == va) {
                    other.insert(k + 1, new_v);
                }
            }
            let mut cell = cell;
            cell.insert(e + 1, new_v);
            let r = if e + 1 <= r { r + 1 } else { r };
            cut(&cell, r, e + 1)
        };
        cells[c] = first;
        cells.push(second);
    }
}

/// The two loops of `cell` separated by the diagonal between local vertices `i` and `j`.
fn cut(cell: &[usize], i: usize, j: usize) -> (Vec<usize>, Vec<usize>) {
    let n = cell.len();
    let walk = |from: usize, to: usize| {
        let mut out = vec![cell[from]];
        let mut k = from;
        while k != to {
            k = (k + 1) % n;
            out.push(cell[k]);
        }
        out
    };
    (walk(i, j), walk(j, i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(vertices: &[Point2], cells: &[Vec<usize>]) -> f64 {
        cells.iter().map(|c| signed_area(&polygon(vertices, c))).sum()
    }

    #[test]
    fn l_shaped_cell_is_split() {
        let mut v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let mut cells = vec![vec![0, 1, 2, 3, 4, 5]];
        split_reflex_cells(&mut v, &mut cells, 1e-12);
        assert_eq!(cells.len(), 2);
        assert!((area(&v, &cells) - 3.0).abs() < 1e-14);
        for c in &cells {
            let p = polygon(&v, c);
            assert!((0..p.len()).all(|i| turn(&p, i) >= -1e-12));
        }
    }

    #[test]
    fn short_interior_edge_collapses() {
        // two quads sharing a vertical edge with a tiny kink in the middle
        let mut v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.001, 1.001),
        ];
        let mut cells = vec![vec![0, 1, 6, 7, 4, 5], vec![1, 2, 3, 4, 7, 6]];
        collapse_short_edges(&mut v, &mut cells, 0.1, 1e-12);
        assert_eq!(cells[0].len(), 5);
        assert_eq!(cells[1].len(), 5);
        assert!((area(&v, &cells) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn sliver_triangle_is_removed() {
        // L-shaped domain with a thin triangle at the reflex corner
        let mut v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.5, 1.0),
            Point2::new(0.5, 0.5),
            Point2::new(0.5001, 0.5),
            Point2::new(0.0, 0.5),
        ];
        let mut cells = vec![vec![0, 1, 5, 4, 6], vec![1, 2, 3, 5], vec![5, 3, 4]];
        collapse_short_edges(&mut v, &mut cells, 0.1, 1e-12);
        assert_eq!(cells, vec![vec![0, 1, 4, 6], vec![1, 2, 3, 4], vec![]]);
        assert!((area(&v, &cells) - 0.75).abs() < 1e-14);
        assert_eq!(v[4], Point2::new(0.5, 0.5));
    }

    #[test]
    fn corners_do_not_move() {
        let mut v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.01),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let mut cells = vec![vec![0, 1, 2, 3, 4]];
        collapse_short_edges(&mut v, &mut cells, 0.1, 1e-12);
        assert_eq!(cells[0], vec![0, 1, 3, 4]);
        assert_eq!(v[1], Point2::new(1.0, 0.0));
    }
}
