//! `fbms`: command-line driver for the stacking toolkit.
//!
//! Exit codes: 0 when every check holds, 1 when a criterion or identity fails,
//! 2 for usage errors, 3 for runtime errors.

mod commands;
mod config;
mod criteria;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) | CliError::Run(s) => f.write_str(s),
        }
    }
}

impl From<fbms::Error> for CliError {
    fn from(e: fbms::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(format!("io: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(name = "fbms", version, about = "Disc stackings in the unit ball: invariants, meshes, curvature and spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Number of disc layers.
    #[arg(long = "N", global = true)]
    n_layers: Option<usize>,

    /// Ribbons per gap.
    #[arg(long, global = true)]
    m: Option<usize>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for random probes.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Finite-volume grid spacing.
    #[arg(long = "grid-h", global = true)]
    grid_h: Option<f64>,

    /// Target mesh edge length.
    #[arg(long, global = true)]
    resolution: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Topological identities over the configured grid.
    Topology,
    /// Waist ratios, derived parameters, forces and the cokernel map.
    Balance,
    /// Mesh, OBJ export and audits.
    Surface {
        /// Skip the triangle self-intersection test.
        #[arg(long)]
        no_intersections: bool,
    },
    /// Curvature oracle agreement, catenoid curvature and vertical forces.
    Geometry,
    /// Model spectra by closed forms and finite volumes.
    Spectra,
    /// Index budgets.
    Index,
    /// The acceptance matrix.
    Verify {
        /// Restrict to these suites (topology, balance, geometry, spectra, index, surface).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(CliError::Usage)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.n_layers {
        cfg.n_layers = n;
    }
    if let Some(m) = cli.m {
        cfg.m = m;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(h) = cli.grid_h {
        cfg.grid_h = h;
    }
    if let Some(r) = cli.resolution {
        cfg.resolution = r;
    }
    if let Command::Verify { only } = &cli.command {
        if !only.is_empty() {
            cfg.only = Some(only.clone());
        }
    }
    if let Some(only) = &cfg.only {
        if let Some(bad) = only.iter().find(|s| !criteria::SUITES.contains(&s.as_str())) {
            return Err(CliError::Usage(format!("unknown suite '{bad}'; expected one of {:?}", criteria::SUITES)));
        }
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    all_pass: bool,
    failed: Vec<usize>,
    verdicts: &'a [criteria::Verdict],
}

fn verify(cfg: &RunConfig) -> Result<bool, CliError> {
    let verdicts = criteria::run(cfg, cfg.only.as_deref());
    let failed: Vec<usize> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    for v in &verdicts {
        let tail = v.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default();
        println!("{} criterion {:>2} [{}] {}{tail}", if v.passed { "PASS" } else { "FAIL" }, v.id, v.suite, v.name);
    }
    let rep = VerifyReport { all_pass: failed.is_empty(), failed, verdicts: &verdicts };
    fbms::surface::export_report(&rep, &cfg.out_file("verify.json")?)?;
    if verdicts.iter().any(|v| v.error.is_some()) {
        let list: Vec<String> = verdicts.iter().filter_map(|v| v.error.as_ref().map(|e| format!("{}: {e}", v.id))).collect();
        return Err(CliError::Run(format!("criteria could not be evaluated: {}", list.join("; "))));
    }
    Ok(rep.all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = std::time::Instant::now();
    let outcome = resolve(&cli).and_then(|cfg| match &cli.command {
        Command::Topology => commands::topology(&cfg),
        Command::Balance => commands::balance(&cfg),
        Command::Surface { no_intersections } => commands::surface(&cfg, !no_intersections),
        Command::Geometry => commands::geometry(&cfg),
        Command::Spectra => commands::spectra(&cfg),
        Command::Index => commands::index(&cfg),
        Command::Verify { .. } => verify(&cfg),
    });
    eprintln!("elapsed {:.2} s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(e)) => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
