//! Experiment driver: configurations, presets, mesh families and convergence reports.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Result, VemError};
use crate::geometry::Point2;
use crate::hodge::{solve, HodgeSolution, QuadCurlProblem};
use crate::mesh::{
    gen_random_voronoi, gen_structured_voronoi, load_mesh, refine_quads, refine_to_quads, DomainSpec, LloydOptions,
    PolygonMesh,
};
use crate::metrics::{
    boundary_tangential_error, coefficient_relative_error, h1_broken_error_xi, inter_level_relative_u,
    inter_level_relative_xi, l2_error_u, ConvergenceReport, ReportRow,
};
use crate::scalar::VemSpace;

/// `d^n/dt^n sin³(πt)`.
fn sin3_derivative(n: u32, t: f64) -> f64 {
    let shift = n as f64 * PI / 2.0;
    (3.0 * PI.powi(n as i32) * (PI * t + shift).sin() - (3.0 * PI).powi(n as i32) * (3.0 * PI * t + shift).sin()) / 4.0
}

/// Smooth solution on the unit square with stream function `φ = sin³(πx) sin³(πy)`:
/// `u = curl φ`, `ξ = curl u = -Δφ`, `f = curl Δ²φ`.
pub mod manufactured {
    use super::*;

    fn s(n: u32, t: f64) -> f64 {
        sin3_derivative(n, t)
    }

    pub fn phi(p: Point2) -> f64 {
        s(0, p.x) * s(0, p.y)
    }

    pub fn u(p: Point2) -> Point2 {
        Point2::new(s(0, p.x) * s(1, p.y), -s(1, p.x) * s(0, p.y))
    }

    pub fn xi(p: Point2) -> f64 {
        -(s(2, p.x) * s(0, p.y) + s(0, p.x) * s(2, p.y))
    }

    pub fn grad_xi(p: Point2) -> Point2 {
        Point2::new(
            -(s(3, p.x) * s(0, p.y) + s(1, p.x) * s(2, p.y)),
            -(s(2, p.x) * s(1, p.y) + s(0, p.x) * s(3, p.y)),
        )
    }

    pub fn f(p: Point2) -> Point2 {
        let (x, y) = (p.x, p.y);
        Point2::new(
            s(4, x) * s(1, y) + 2.0 * s(2, x) * s(3, y) + s(0, x) * s(5, y),
            -(s(5, x) * s(0, y) + 2.0 * s(3, x) * s(2, y) + s(1, x) * s(4, y)),
        )
    }
}

/// Piecewise constant load by distance from the origin.
pub fn piecewise_constant_rhs(p: Point2) -> Point2 {
    let r = p.norm();
    if r < 0.5f64.sqrt() {
        Point2::new(0.25, 1.25)
    } else if r < 1.0 {
        Point2::new(0.5, 1.5)
    } else {
        Point2::new(1.0, 2.0)
    }
}

pub fn smooth_rhs(p: Point2) -> Point2 {
    let (x, y) = (p.x, p.y);
    Point2::new(
        (x * x + 1.0) * x.sin() + x * y.powi(3) + 2.0,
        (y * y + 1.0) * x.cos() + x.powi(3) * y * y - 1.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsKind {
    /// Load of the manufactured solution; exact errors are available.
    Manufactured,
    PiecewiseConstant,
    Smooth,
}

impl RhsKind {
    pub fn eval(self, p: Point2) -> Point2 {
        match self {
            RhsKind::Manufactured => manufactured::f(p),
            RhsKind::PiecewiseConstant => piecewise_constant_rhs(p),
            RhsKind::Smooth => smooth_rhs(p),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "manufactured" => Some(RhsKind::Manufactured),
            "piecewise_constant" => Some(RhsKind::PiecewiseConstant),
            "smooth" => Some(RhsKind::Smooth),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    /// Dual meshes of uniform triangulations, `n = base_n · 2^i` at level `i`.
    Structured,
    /// Independent random Voronoi meshes with `n_seeds · 4^i` seeds at level `i`.
    Random,
    /// Random Voronoi mesh, then one split into quadrilaterals, then uniform quad refinement.
    Nested,
    /// A mesh file as level 0, refined like `Nested`.
    File,
}

impl MeshKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "structured" => Some(MeshKind::Structured),
            "random" => Some(MeshKind::Random),
            "nested" => Some(MeshKind::Nested),
            "file" => Some(MeshKind::File),
            _ => None,
        }
    }

    pub fn is_nested(self) -> bool {
        matches!(self, MeshKind::Nested | MeshKind::File)
    }
}

pub fn parse_domain(s: &str) -> Option<DomainSpec> {
    match s {
        "unit_square" => Some(DomainSpec::UnitSquare),
        "gamma" => Some(DomainSpec::GammaShape),
        "square_with_hole" => Some(DomainSpec::SquareWithHole),
        "two_holes" => Some(DomainSpec::TwoHoles),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    pub kind: MeshKind,
    /// `None` selects the preset default for the chosen `k`.
    pub levels: Option<usize>,
    pub seed: u64,
    pub n_seeds: usize,
    pub base_n: usize,
    pub file: Option<PathBuf>,
    pub lloyd_iters: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            kind: MeshKind::Nested,
            levels: None,
            seed: 1,
            n_seeds: 25,
            base_n: 5,
            file: None,
            lloyd_iters: LloydOptions::default().max_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub k: usize,
    pub beta: f64,
    pub gamma: f64,
    pub domain: DomainSpec,
    pub mesh: MeshConfig,
    pub rhs: RhsKind,
    /// `π/ω` of the largest reentrant angle `ω`.
    pub expected_rate: Option<f64>,
    pub output: Option<PathBuf>,
}

pub const PRESETS: [&str; 5] = ["exp1", "exp2", "exp3", "exp4", "exp5"];

/// Configuration of a named experiment with `k = 1`.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = |domain, rhs, beta, gamma, kind, n_seeds, seed, rate| ExperimentConfig {
        name: name.to_string(),
        k: 1,
        beta,
        gamma,
        domain,
        mesh: MeshConfig { kind, n_seeds, seed, ..MeshConfig::default() },
        rhs,
        expected_rate: Some(rate),
        output: None,
    };
    let two_thirds = 2.0 / 3.0;
    Ok(match name {
        "exp1" => base(DomainSpec::UnitSquare, RhsKind::Manufactured, 0.0, 0.0, MeshKind::Structured, 20, 1, 2.0),
        "exp2" => base(DomainSpec::UnitSquare, RhsKind::PiecewiseConstant, 0.0, 0.0, MeshKind::Nested, 25, 2, 2.0),
        "exp3" => base(DomainSpec::GammaShape, RhsKind::PiecewiseConstant, 0.0, 0.0, MeshKind::Nested, 25, 3, two_thirds),
        "exp4" => base(DomainSpec::SquareWithHole, RhsKind::Smooth, 1.0, 1.0, MeshKind::Nested, 36, 4, two_thirds),
        "exp5" => base(DomainSpec::TwoHoles, RhsKind::Smooth, 1.0, 1.0, MeshKind::Nested, 75, 5, two_thirds),
        _ => return Err(VemError::Config(format!("unknown preset '{name}' (expected one of {})", PRESETS.join(", ")))),
    })
}

impl ExperimentConfig {
    /// Level count used when none is configured: the deepest level below about 150k dofs.
    pub fn default_levels(&self) -> usize {
        match (self.name.as_str(), self.k) {
            ("exp1", 1) => 6,
            ("exp1", _) => 5,
            ("exp2" | "exp3", 1) => 7,
            ("exp2" | "exp3", _) => 6,
            ("exp4" | "exp5", 1) => 6,
            ("exp4" | "exp5", _) => 5,
            _ => 4,
        }
    }

    pub fn levels(&self) -> usize {
        self.mesh.levels.unwrap_or_else(|| self.default_levels())
    }

    /// Exact errors are reported when the manufactured solution applies, relative errors otherwise.
    pub fn exact_errors(&self) -> bool {
        self.rhs == RhsKind::Manufactured && self.domain == DomainSpec::UnitSquare && self.mesh.kind != MeshKind::File
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(VemError::Config(m));
        if !matches!(self.k, 1 | 2) {
            return err(format!("k must be 1 or 2 (got {})", self.k));
        }
        if !(self.beta >= 0.0 && self.gamma >= 0.0) {
            return err(format!("beta and gamma must be non-negative (got {}, {})", self.beta, self.gamma));
        }
        if self.levels() == 0 {
            return err("at least one level is required".into());
        }
        let m = self.domain.betti_number();
        match self.name.as_str() {
            "exp4" | "exp5" if self.gamma <= 0.0 => return err(format!("{} requires gamma > 0", self.name)),
            "exp1" | "exp2" | "exp3" if self.gamma != 0.0 || m > 0 => {
                return err(format!("{} requires gamma = 0 on a simply connected domain", self.name))
            }
            _ => {}
        }
        if self.mesh.kind != MeshKind::File && m > 0 && self.gamma <= 0.0 {
            return err(format!("gamma must be positive on a domain with {m} hole(s)"));
        }
        if self.rhs == RhsKind::Manufactured && self.domain != DomainSpec::UnitSquare {
            return err("the manufactured load is defined on the unit square only".into());
        }
        if self.mesh.kind == MeshKind::Structured && self.domain != DomainSpec::UnitSquare {
            return err("structured meshes cover the unit square only".into());
        }
        if self.mesh.kind == MeshKind::File && self.mesh.file.is_none() {
            return err("mesh.kind = file needs mesh.file".into());
        }
        if !self.exact_errors() && !self.mesh.kind.is_nested() {
            return err("relative errors need a nested mesh family (mesh.kind = nested or file)".into());
        }
        Ok(())
    }

    fn lloyd(&self) -> LloydOptions {
        LloydOptions { max_iters: self.mesh.lloyd_iters, ..LloydOptions::default() }
    }

    /// Mesh of level `i`; nested kinds refine `prev`, the mesh of level `i - 1`.
    pub fn level_mesh(&self, i: usize, prev: Option<&PolygonMesh>) -> Result<PolygonMesh> {
        let mc = &self.mesh;
        match (mc.kind, prev) {
            (MeshKind::Structured, _) => gen_structured_voronoi(mc.base_n << i),
            (MeshKind::Random, _) => {
                let seeds = mc.n_seeds.checked_mul(4usize.pow(i as u32)).ok_or_else(|| {
                    VemError::Config("seed count overflows".into())
                })?;
                gen_random_voronoi(&self.domain, seeds, mc.seed + i as u64, self.lloyd())
            }
            (MeshKind::Nested, None) => gen_random_voronoi(&self.domain, mc.n_seeds, mc.seed, self.lloyd()),
            (MeshKind::File, None) => load_mesh(mc.file.as_ref().expect("validated")),
            (_, Some(p)) if i == 1 => refine_to_quads(p),
            (_, Some(p)) => refine_quads(p),
        }
    }

    fn title(&self) -> String {
        let mut t = format!("{}, k = {}, beta = {}, gamma = {}", self.name, self.k, self.beta, self.gamma);
        if let Some(r) = self.expected_rate {
            t.push_str(&format!(", expected rate {:.4}", r.min(self.k as f64)));
        }
        t
    }
}

fn at_level(level: usize) -> impl Fn(VemError) -> VemError {
    move |e| VemError::AtLevel { level, source: Box::new(e) }
}

/// Solution of one level together with its report row.
pub struct LevelResult {
    pub solution: HodgeSolution,
    pub row: ReportRow,
}

/// Runs every level of the configured family and returns the report. `on_level` sees each
/// level as soon as it is done.
pub fn run_with(config: &ExperimentConfig, mut on_level: impl FnMut(&LevelResult)) -> Result<ConvergenceReport> {
    config.validate()?;
    let rhs = config.rhs;
    let f = move |p: Point2| rhs.eval(p);
    let problem = QuadCurlProblem::new(config.beta, config.gamma, &f)?;
    let exact = config.exact_errors();
    let mut report = ConvergenceReport { title: config.title(), relative: !exact, n_coeffs: 0, rows: Vec::new() };
    let mut prev: Option<HodgeSolution> = None;
    for i in 0..config.levels() {
        let ctx = at_level(i);
        let mesh = config.level_mesh(i, prev.as_ref().map(|s| &s.u.space.mesh)).map_err(&ctx)?;
        let h = mesh.h();
        let space = VemSpace::new(mesh, config.k).map_err(&ctx)?;
        let solution = solve(&space, &problem).map_err(&ctx)?;
        let m = solution.coeffs.len();
        report.n_coeffs = m;
        let (e_bdry, e_bdry_max) = boundary_tangential_error(&solution.u).map_err(&ctx)?;
        let mut row = ReportRow {
            level: i,
            h,
            dofs: space.n_dofs(),
            e_u: None,
            e_xi: None,
            e_bdry: Some(e_bdry),
            e_bdry_max: Some(e_bdry_max),
            coeffs: solution.coeffs.clone(),
            rel_coeffs: vec![None; m],
        };
        if exact {
            row.e_u = Some(l2_error_u(&solution.u, &manufactured::u));
            row.e_xi = Some(h1_broken_error_xi(&solution.xi, &manufactured::grad_xi));
        } else if let Some(p) = &prev {
            row.e_u = Some(inter_level_relative_u(&p.u, &solution.u).map_err(&ctx)?);
            row.e_xi = Some(inter_level_relative_xi(&p.xi, &solution.xi).map_err(&ctx)?);
            row.rel_coeffs =
                coefficient_relative_error(&p.coeffs, &solution.coeffs).map_err(&ctx)?.into_iter().map(Some).collect();
        }
        let level = LevelResult { solution, row };
        on_level(&level);
        report.rows.push(level.row);
        prev = Some(level.solution);
    }
    Ok(report)
}

pub fn run(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    run_with(config, |_| {})
}

/// Writes the CSV to `path` and the markdown table next to it with extension `.md`.
pub fn write_report(report: &ConvergenceReport, path: &Path) -> Result<PathBuf> {
    std::fs::write(path, report.to_csv())?;
    let md = path.with_extension("md");
    std::fs::write(&md, report.to_markdown())?;
    Ok(md)
}

/// Reads and parses a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| VemError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    kind: Option<String>,
    levels: Option<usize>,
    seed: Option<u64>,
    n_seeds: Option<usize>,
    base_n: Option<usize>,
    file: Option<PathBuf>,
    lloyd_iters: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    k: Option<usize>,
    beta: Option<f64>,
    gamma: Option<f64>,
    domain: Option<String>,
    rhs: Option<String>,
    expected_rate: Option<f64>,
    output: Option<PathBuf>,
    #[serde(default)]
    mesh: RawMesh,
}

/// Parses a TOML configuration. Mesh keys may be dotted (`mesh.levels = 5`) or grouped under a
/// `[mesh]` table. A preset `name` seeds all keys that are not given.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
        VemError::Parse { line, msg: e.message().to_string() }
    })?;
    let name = raw.name.unwrap_or_else(|| "custom".into());
    let mut cfg = if PRESETS.contains(&name.as_str()) {
        preset(&name)?
    } else {
        ExperimentConfig {
            name,
            k: 1,
            beta: 0.0,
            gamma: 0.0,
            domain: DomainSpec::UnitSquare,
            mesh: MeshConfig::default(),
            rhs: RhsKind::Smooth,
            expected_rate: None,
            output: None,
        }
    };
    let bad = |what: &str, value: &str| VemError::Config(format!("invalid {what} '{value}'"));
    if let Some(v) = raw.k {
        cfg.k = v;
    }
    if let Some(v) = raw.beta {
        cfg.beta = v;
    }
    if let Some(v) = raw.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = raw.domain {
        cfg.domain = parse_domain(&v).ok_or_else(|| bad("domain", &v))?;
    }
    if let Some(v) = raw.rhs {
        cfg.rhs = RhsKind::parse(&v).ok_or_else(|| bad("right-hand side", &v))?;
    }
    cfg.expected_rate = raw.expected_rate.or(cfg.expected_rate);
    cfg.output = raw.output.or(cfg.output);
    let m = raw.mesh;
    if let Some(v) = m.kind {
        cfg.mesh.kind = MeshKind::parse(&v).ok_or_else(|| bad("mesh kind", &v))?;
    }
    cfg.mesh.levels = m.levels.or(cfg.mesh.levels);
    cfg.mesh.seed = m.seed.unwrap_or(cfg.mesh.seed);
    cfg.mesh.n_seeds = m.n_seeds.unwrap_or(cfg.mesh.n_seeds);
    cfg.mesh.base_n = m.base_n.unwrap_or(cfg.mesh.base_n);
    cfg.mesh.file = m.file.or(cfg.mesh.file);
    cfg.mesh.lloyd_iters = m.lloyd_iters.unwrap_or(cfg.mesh.lloyd_iters);
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let e2 = preset("exp2").unwrap();
        assert_eq!(e2.rhs.eval(Point2::new(0.1, 0.1)), Point2::new(0.25, 1.25));
        let e4 = preset("exp4").unwrap();
        assert_eq!((e4.beta, e4.gamma), (1.0, 1.0));
        for name in PRESETS {
            preset(name).unwrap().validate().unwrap();
        }
        assert!(matches!(preset("exp9"), Err(VemError::Config(_))));
    }

    #[test]
    fn radius_thresholds() {
        assert_eq!(piecewise_constant_rhs(Point2::new(0.8, 0.0)), Point2::new(0.5, 1.5));
        assert_eq!(piecewise_constant_rhs(Point2::new(1.0, 0.0)), Point2::new(1.0, 2.0));
        assert_eq!(piecewise_constant_rhs(Point2::new(-0.9, -0.9)), Point2::new(1.0, 2.0));
    }

    #[test]
    fn config_file() {
        let cfg = parse_config(
            "name = \"exp4\" # preset\nk = 2\n[mesh]\nlevels = 3\nseed = 11\n\noutput = \"x.csv\"\n",
        );
        assert!(matches!(cfg, Err(VemError::Parse { line: 7, .. })));
        let cfg = parse_config("name = \"exp4\"\nk = 2\nmesh.levels = 3\nmesh.seed = 11\n").unwrap();
        assert_eq!((cfg.k, cfg.levels(), cfg.mesh.seed, cfg.gamma), (2, 3, 11, 1.0));
        assert_eq!(cfg.domain, DomainSpec::SquareWithHole);
        let cfg = parse_config("name = \"exp1\"\n[mesh]\nbase_n = 4\n").unwrap();
        assert_eq!(cfg.mesh.base_n, 4);
        assert!(matches!(parse_config("k = \"two\""), Err(VemError::Parse { line: 1, .. })));
        assert!(matches!(parse_config("colour = \"red\""), Err(VemError::Parse { .. })));
        assert!(matches!(parse_config("domain = \"torus\""), Err(VemError::Config(_))));
    }

    #[test]
    fn invalid_configs() {
        let mut c = preset("exp4").unwrap();
        c.gamma = 0.0;
        assert!(c.validate().is_err());
        let mut c = preset("exp2").unwrap();
        c.mesh.kind = MeshKind::Random;
        assert!(c.validate().is_err());
        let mut c = preset("exp1").unwrap();
        c.k = 3;
        assert!(c.validate().is_err());
    }

    #[test]
    fn sin3_derivatives_match_differences() {
        for &t in &[0.13, 0.5, 0.77] {
            for n in 0..5 {
                let d = 1e-5;
                let fd = (sin3_derivative(n, t + d) - sin3_derivative(n, t - d)) / (2.0 * d);
                let scale = 1.0 + sin3_derivative(n + 1, t).abs();
                assert!((fd - sin3_derivative(n + 1, t)).abs() < 1e-5 * scale * 3f64.powi(n as i32));
            }
        }
    }
}
