use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use basin_cli::commands;
use basin_cli::config::RunConfig;

/// Pullback and uniform attractor approximation for parameterized
/// non-autonomous systems.
#[derive(Parser)]
#[command(name = "basin", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed override for random seed sets and trial batteries.
    #[arg(long)]
    seed: Option<u64>,
    /// Hausdorff convergence tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// Integrator relative tolerance override.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Worker threads for sweeps and trial batteries (0 = automatic).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    /// Output directory for the oracle table.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Hausdorff tolerance for the uniform-attractor check.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Approximate one pullback attractor section.
    Pullback(RunArgs),
    /// Approximate the uniform attractor by windowed unions.
    Uniform(RunArgs),
    /// Sections over a parameter grid with adjacent-pair distances.
    Sweep(RunArgs),
    /// Equi-attraction rates against precomputed sweep sections.
    Equi(RunArgs),
    /// Randomized a priori bound battery (Lorenz or NSE).
    VerifyBounds(RunArgs),
    /// Closed-form benchmark battery with a pass/fail table.
    Oracle(OracleArgs),
}

fn run_with(
    args: RunArgs,
    f: impl FnOnce(&RunConfig, &std::path::Path) -> anyhow::Result<basin_cli::Outcome>,
) -> anyhow::Result<basin_cli::Outcome> {
    commands::init_threads(args.threads);
    let mut cfg = RunConfig::load(&args.config)?;
    commands::apply_overrides(&mut cfg, args.seed, args.tol, args.rel_tol);
    let out = commands::resolve_out(args.out, cfg.out.as_ref());
    std::fs::create_dir_all(&out)?;
    f(&cfg, &out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Pullback(a) => run_with(a, commands::cmd_pullback),
        Cmd::Uniform(a) => run_with(a, commands::cmd_uniform),
        Cmd::Sweep(a) => run_with(a, commands::cmd_sweep),
        Cmd::Equi(a) => run_with(a, commands::cmd_equi),
        Cmd::VerifyBounds(a) => run_with(a, commands::cmd_verify_bounds),
        Cmd::Oracle(a) => {
            commands::init_threads(a.threads);
            let out = commands::resolve_out(a.out, None);
            commands::cmd_oracle(&out, a.seed, a.tol, a.rel_tol)
        }
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.code() as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
