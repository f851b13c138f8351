//! Batch front door: parse a JSON run configuration, dispatch the command,
//! write the result tables.
//!
//! Exit status: 0 when every asserted verdict passes, 1 when an asserted
//! verdict fails, 2 on configuration or solver errors. Observational reports
//! never change the exit status.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-rejecting range guards

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

/// Environment variable providing the default output directory.
const OUT_DIR_ENV: &str = "STEKLOV_OUT_DIR";

#[derive(Parser)]
#[command(name = "steklov", version, about = "Steklov spectra of warped products: solver, bounds, sweeps")]
struct Cli {
    /// Path to the JSON run configuration
    #[arg(long)]
    config: PathBuf,

    /// Output directory (defaults to the config's output_dir, then
    /// $STEKLOV_OUT_DIR, then the current directory)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Cap on worker threads used by sweeps
    #[arg(long)]
    workers: Option<usize>,

    /// Override the mesh element count from the config
    #[arg(long)]
    mesh: Option<usize>,

    /// Suppress the human-readable summary
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build_global()
        {
            eprintln!("error: could not configure {workers} workers: {e}");
            return ExitCode::from(2);
        }
    }

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match config::validate(&text) {
        Ok(cfg) => cfg,
        Err(errors) => {
            eprintln!("error: invalid configuration ({} problem(s)):", errors.len());
            for e in errors {
                eprintln!("  - {e}");
            }
            return ExitCode::from(2);
        }
    };
    if let Some(mesh) = cli.mesh {
        if mesh < 8 {
            eprintln!("error: --mesh must be >= 8, got {mesh}");
            return ExitCode::from(2);
        }
        cfg.mesh_n = mesh;
    }

    let out_dir = cli
        .out
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    match commands::run(&cfg, &out_dir, cli.quiet) {
        Ok(outcome) if outcome.all_passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
