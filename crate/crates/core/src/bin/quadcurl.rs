use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quadcurl_vem::experiment::{load_config, parse_domain, preset, run_with, write_report, ExperimentConfig};
use quadcurl_vem::mesh::{
    gen_random_voronoi, gen_structured_voronoi, load_mesh, refine_quads, refine_to_quads, save_mesh, shape_regularity,
    write_mesh, LloydOptions, PolygonMesh,
};
use quadcurl_vem::{Result, VemError};

#[derive(Parser)]
#[command(name = "quadcurl", version, about = "Virtual element solver for the quad-curl problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study.
    Run(RunArgs),
    /// Generate, refine or inspect meshes.
    #[command(subcommand)]
    Mesh(MeshCommand),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named experiment (exp1 .. exp5).
    #[arg(long, required_unless_present = "config")]
    preset: Option<String>,
    /// Polynomial order.
    #[arg(long)]
    k: Option<usize>,
    /// Number of mesh levels.
    #[arg(long)]
    levels: Option<usize>,
    /// Mesh generator seed.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV report path; a Markdown table is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress per-level progress on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Structured,
    Random,
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Generate a Voronoi mesh.
    Gen {
        #[arg(long, value_enum, default_value = "random")]
        kind: GenKind,
        /// Seeds per direction (structured) or number of random seeds.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// unit_square, gamma, square_with_hole or two_holes (random meshes only).
        #[arg(long, default_value = "unit_square")]
        domain: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Lloyd iterations.
        #[arg(long, default_value_t = 100)]
        lloyd: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refine a mesh once: polygons to quads, then quads to quads.
    Refine {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print size and shape statistics of a mesh.
    Info { input: PathBuf },
}

fn emit(mesh: &PolygonMesh, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => save_mesh(mesh, path),
        None => {
            print!("{}", write_mesh(mesh));
            Ok(())
        }
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg: ExperimentConfig = match (&args.config, &args.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(VemError::Config("either --config or --preset is required".into())),
    };
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(levels) = args.levels {
        cfg.mesh.levels = Some(levels);
    }
    if let Some(seed) = args.seed {
        cfg.mesh.seed = seed;
    }
    if args.out.is_some() {
        cfg.output = args.out;
    }
    let quiet = args.quiet;
    let report = run_with(&cfg, |l| {
        if !quiet {
            eprintln!("level {} done: {} dofs, h = {:.4e}", l.row.level, l.row.dofs, l.row.h);
        }
    })?;
    println!("{}", report.to_markdown());
    if let Some(path) = &cfg.output {
        let md = write_report(&report, path)?;
        eprintln!("wrote {} and {}", path.display(), md.display());
    }
    Ok(())
}

fn mesh(cmd: MeshCommand) -> Result<()> {
    match cmd {
        MeshCommand::Gen { kind, n, domain, seed, lloyd, out } => {
            let mesh = match kind {
                GenKind::Structured => gen_structured_voronoi(n)?,
                GenKind::Random => {
                    let d = parse_domain(&domain).ok_or_else(|| VemError::Config(format!("unknown domain '{domain}'")))?;
                    gen_random_voronoi(&d, n, seed, LloydOptions { max_iters: lloyd, ..LloydOptions::default() })?
                }
            };
            emit(&mesh, out.as_ref())
        }
        MeshCommand::Refine { input, out } => {
            let coarse = load_mesh(&input)?;
            let fine = if coarse.cells.iter().all(|c| c.len() == 4) { refine_quads(&coarse)? } else { refine_to_quads(&coarse)? };
            emit(&fine, out.as_ref())
        }
        MeshCommand::Info { input } => {
            let m = load_mesh(&input)?;
            let s = shape_regularity(&m);
            println!("vertices {}", m.n_vertices());
            println!("cells {}", m.n_cells());
            println!("holes {}", m.betti_number());
            println!("area {:.12}", m.area());
            println!("h {:.6e}", s.h);
            println!("min_edge_ratio {:.6e}", s.min_edge_ratio);
            println!("star_kernel_ratio {:.6e}", s.star_kernel_ratio);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Mesh(cmd) => mesh(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
