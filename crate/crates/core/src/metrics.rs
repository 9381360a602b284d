//! Error functionals and convergence tables.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Result, VemError};
use crate::geometry::Point2;
use crate::hodge::DiscreteVectorField;
use crate::quadrature::edge_quadrature;
use crate::scalar::{Projection, ScalarField, VectorFn, VemSpace};

fn cell_sum(space: &VemSpace, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    let parts: Vec<f64> = (0..space.elements.len()).into_par_iter().map(f).collect();
    parts.iter().sum()
}

/// `‖u - u_h‖_{L²(Ω)}`.
pub fn l2_error_u(u_h: &DiscreteVectorField, exact: &VectorFn) -> f64 {
    let space = &u_h.space;
    cell_sum(space, |c| {
        let rule = space.elements[c].quadrature();
        rule.integrate(|x| {
            let d = exact(x) - u_h.eval_in(c, x);
            d.dot(d)
        })
    })
    .sqrt()
}

/// `‖u_h‖_{L²(Ω)}`.
pub fn l2_norm_u(u_h: &DiscreteVectorField) -> f64 {
    l2_error_u(u_h, &|_| Point2::default())
}

/// `|ξ - Π¹ξ_h|_{h,1}`, given `grad ξ`.
pub fn h1_broken_error_xi(xi_h: &ScalarField, grad_exact: &VectorFn) -> f64 {
    let space = &xi_h.space;
    cell_sum(space, |c| {
        let rule = space.elements[c].quadrature();
        rule.integrate(|x| {
            let d = grad_exact(x) - xi_h.gradient_in(Projection::Pi1, c, x);
            d.dot(d)
        })
    })
    .sqrt()
}

/// `(‖n × u_h‖_{L²(∂Ω)}, max over boundary nodes of |n × u_h|)`; at a node shared by two
/// boundary edges both one-sided values are considered.
pub fn boundary_tangential_error(u_h: &DiscreteVectorField) -> Result<(f64, f64)> {
    let space = &u_h.space;
    let mesh = &space.mesh;
    let topo = mesh.topology()?;
    let k = space.k;
    let mut l2 = 0.0;
    let mut max: f64 = 0.0;
    for (_, e) in topo.boundary_edges() {
        let (a, b) = (mesh.vertices[e.v0], mesh.vertices[e.v1]);
        let d = b - a;
        let len = d.norm();
        // the domain lies to the left of v0 -> v1
        let n = Point2::new(d.y / len, -d.x / len);
        let tang = |p: Point2| {
            let u = u_h.eval_in(e.left, p);
            n.x * u.y - n.y * u.x
        };
        l2 += edge_quadrature(a, b, 2 * k).integrate(|p| tang(p).powi(2));
        let mut nodes = vec![a, b];
        if k == 2 {
            nodes.push(a.midpoint(b));
        }
        for p in nodes {
            max = max.max(tang(p).abs());
        }
    }
    Ok((l2.sqrt(), max))
}

fn check_parents(coarse: &VemSpace, fine: &VemSpace) -> Result<Vec<usize>> {
    let parents = fine
        .mesh
        .parent_of_cell
        .clone()
        .ok_or_else(|| VemError::Pipeline("fine mesh has no parent links".into()))?;
    if fine.mesh.level != coarse.mesh.level + 1 || parents.iter().any(|&p| p >= coarse.mesh.n_cells()) {
        return Err(VemError::Pipeline("meshes are not consecutive levels of one nested family".into()));
    }
    Ok(parents)
}

/// `‖u_c - u_f‖ / ‖u_f‖` on the fine mesh, the coarse field evaluated through parent cells.
pub fn inter_level_relative_u(coarse: &DiscreteVectorField, fine: &DiscreteVectorField) -> Result<f64> {
    let parents = check_parents(&coarse.space, &fine.space)?;
    let space = &fine.space;
    let diff = cell_sum(space, |c| {
        space.elements[c].quadrature().integrate(|x| {
            let d = coarse.eval_in(parents[c], x) - fine.eval_in(c, x);
            d.dot(d)
        })
    });
    let norm = l2_norm_u(fine);
    if norm == 0.0 {
        return Err(VemError::Pipeline("fine-level field vanishes; relative error undefined".into()));
    }
    Ok(diff.sqrt() / norm)
}

/// `|Π¹ξ_c - Π¹ξ_f|_{h,1} / |Π¹ξ_f|_{h,1}` on the fine mesh.
pub fn inter_level_relative_xi(coarse: &ScalarField, fine: &ScalarField) -> Result<f64> {
    let parents = check_parents(&coarse.space, &fine.space)?;
    let space = &fine.space;
    let (diff, norm) = {
        let parts: Vec<(f64, f64)> = (0..space.elements.len())
            .into_par_iter()
            .map(|c| {
                let rule = space.elements[c].quadrature();
                let mut s = (0.0, 0.0);
                for (x, w) in rule.iter() {
                    let gf = fine.gradient_in(Projection::Pi1, c, x);
                    let d = coarse.gradient_in(Projection::Pi1, parents[c], x) - gf;
                    s.0 += w * d.dot(d);
                    s.1 += w * gf.dot(gf);
                }
                s
            })
            .collect();
        parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
    };
    if norm == 0.0 {
        return Err(VemError::Pipeline("fine-level field vanishes; relative error undefined".into()));
    }
    Ok((diff / norm).sqrt())
}

/// `|c_i - c_{i+1}| / |c_{i+1}|` entrywise.
pub fn coefficient_relative_error(coarse: &[f64], fine: &[f64]) -> Result<Vec<f64>> {
    if coarse.len() != fine.len() {
        return Err(VemError::Pipeline("coefficient lists differ in length".into()));
    }
    coarse
        .iter()
        .zip(fine)
        .map(|(&a, &b)| {
            if b.abs() < 1e-14 {
                Err(VemError::Pipeline(format!("fine coefficient {b:e} too small for a relative error")))
            } else {
                Ok((a - b).abs() / b.abs())
            }
        })
        .collect()
}

/// Observed order between two rows, `None` when either error is missing or not positive.
pub fn rate(e_prev: Option<f64>, e: Option<f64>, h_prev: f64, h: f64) -> Option<f64> {
    match (e_prev, e) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 && h_prev != h => Some((a / b).ln() / (h_prev / h).ln()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub e_u: Option<f64>,
    pub e_xi: Option<f64>,
    pub e_bdry: Option<f64>,
    /// Largest nodal `|n × u_h|` on the boundary.
    pub e_bdry_max: Option<f64>,
    pub coeffs: Vec<f64>,
    pub rel_coeffs: Vec<Option<f64>>,
}

/// Per-level errors of one run; rates are derived from consecutive rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub title: String,
    pub relative: bool,
    pub n_coeffs: usize,
    pub rows: Vec<ReportRow>,
}

/// Scientific notation with 5 significant digits and a two-digit signed exponent.
pub fn format_sci(x: f64) -> String {
    let s = format!("{x:.4e}");
    match s.split_once('e') {
        Some((m, e)) => {
            let e: i32 = e.parse().unwrap_or(0);
            format!("{m}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
        }
        None => s,
    }
}

fn sci(v: Option<f64>) -> String {
    v.map(format_sci).unwrap_or_default()
}

fn fixed(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

impl ConvergenceReport {
    pub fn rates(&self, col: impl Fn(&ReportRow) -> Option<f64>) -> Vec<Option<f64>> {
        (0..self.rows.len())
            .map(|i| {
                if i == 0 {
                    return None;
                }
                let (p, r) = (&self.rows[i - 1], &self.rows[i]);
                rate(col(p), col(r), p.h, r.h)
            })
            .collect()
    }

    pub fn rate_u(&self) -> Vec<Option<f64>> {
        self.rates(|r| r.e_u)
    }

    pub fn rate_xi(&self) -> Vec<Option<f64>> {
        self.rates(|r| r.e_xi)
    }

    pub fn rate_bdry(&self) -> Vec<Option<f64>> {
        self.rates(|r| r.e_bdry)
    }

    pub fn rate_coeff(&self, j: usize) -> Vec<Option<f64>> {
        self.rates(|r| r.rel_coeffs.get(j).copied().flatten())
    }

    fn header_cells(&self) -> Vec<String> {
        let mut h: Vec<String> =
            ["level", "h", "dofs", "e_u", "rate_u", "e_xi", "rate_xi", "e_bdry", "rate_bdry"].map(String::from).into();
        for j in 1..=self.n_coeffs {
            h.extend([format!("c{j}"), format!("rel_c{j}"), format!("rate_c{j}")]);
        }
        h
    }

    fn row_cells(&self) -> Vec<Vec<String>> {
        let (ru, rx, rb) = (self.rate_u(), self.rate_xi(), self.rate_bdry());
        let rc: Vec<Vec<Option<f64>>> = (0..self.n_coeffs).map(|j| self.rate_coeff(j)).collect();
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut cells = vec![
                    r.level.to_string(),
                    sci(Some(r.h)),
                    r.dofs.to_string(),
                    sci(r.e_u),
                    fixed(ru[i]),
                    sci(r.e_xi),
                    fixed(rx[i]),
                    sci(r.e_bdry),
                    fixed(rb[i]),
                ];
                for (j, rcj) in rc.iter().enumerate() {
                    cells.push(sci(r.coeffs.get(j).copied()));
                    cells.push(sci(r.rel_coeffs.get(j).copied().flatten()));
                    cells.push(fixed(rcj[i]));
                }
                cells
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header_cells().join(",");
        s.push('\n');
        for cells in self.row_cells() {
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(s, "### {}\n", self.title);
        }
        let mut head = self.header_cells();
        if self.relative {
            for c in head.iter_mut() {
                if c == "e_u" || c == "e_xi" {
                    *c = format!("rel {c}");
                }
            }
        }
        let _ = writeln!(s, "| {} |", head.join(" | "));
        let _ = writeln!(s, "|{}", "---|".repeat(head.len()));
        for cells in self.row_cells() {
            let cells: Vec<String> = cells.into_iter().map(|c| if c.is_empty() { "-".into() } else { c }).collect();
            let _ = writeln!(s, "| {} |", cells.join(" | "));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_examples() {
        assert!((rate(Some(1.0), Some(0.5), 0.2, 0.1).unwrap() - 1.0).abs() < 1e-15);
        assert!((rate(Some(1.0), Some(0.25), 0.2, 0.1).unwrap() - 2.0).abs() < 1e-15);
        let r = rate(Some(5.8297e-02), Some(2.9054e-02), 1.8634e-02, 9.3169e-03).unwrap();
        assert!((r - 1.0047).abs() < 1e-4);
        assert_eq!(rate(Some(0.0), Some(1.0), 0.2, 0.1), None);
    }

    #[test]
    fn coefficient_errors() {
        assert_eq!(coefficient_relative_error(&[2.0], &[1.0]).unwrap(), vec![1.0]);
        assert_eq!(coefficient_relative_error(&[0.3, -0.2], &[0.3, -0.2]).unwrap(), vec![0.0, 0.0]);
        assert!(coefficient_relative_error(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn csv_layout() {
        let row = |level, h, e: Option<f64>| ReportRow {
            level,
            h,
            dofs: 10 * (level + 1),
            e_u: e,
            e_xi: e,
            e_bdry: e,
            e_bdry_max: e,
            coeffs: vec![-0.15],
            rel_coeffs: vec![e],
        };
        let rep = ConvergenceReport {
            title: String::new(),
            relative: true,
            n_coeffs: 1,
            rows: vec![row(0, 0.2, None), row(1, 0.1, Some(0.4)), row(2, 0.05, Some(0.2))],
        };
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "level,h,dofs,e_u,rate_u,e_xi,rate_xi,e_bdry,rate_bdry,c1,rel_c1,rate_c1");
        assert_eq!(lines[1], "0,2.0000e-01,10,,,,,,,-1.5000e-01,,");
        assert!(lines[3].starts_with("2,5.0000e-02,30,2.0000e-01,1.0000,"));
    }
}
