//! Convergence study driver: `cargo run --release --example convergence_study -- exp3 2 4`.

use quadcurl_vem::experiment::{preset, run_with};

fn main() -> quadcurl_vem::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = preset(args.first().map_or("exp1", String::as_str))?;
    cfg.k = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    cfg.mesh.levels = Some(args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4));
    let report = run_with(&cfg, |level| eprintln!("level {} ({} dofs) done", level.row.level, level.row.dofs))?;
    println!("{}", report.to_markdown());
    Ok(())
}
