//! `elrp`: batch front end for instance generation, preprocessing, model
//! export, exact solves, validation and the charging-model comparison.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "elrp", version, about = "Electric location-routing with nonlinear charging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances in the canonical JSON format.
    Gen(GenArgs),
    /// Convert an EVRP-NL XML file into a canonical instance.
    Import(ImportArgs),
    /// Report infeasible arcs and escape energies.
    Preprocess(InstanceArgs),
    /// Enumerate recharge paths and the effect of dominance pruning.
    Paths(PathsArgs),
    /// Export a MIP formulation as MPS or LP.
    BuildMip(BuildMipArgs),
    /// Solve a formulation with the configured external MIP backend.
    SolveMip(SolveMipArgs),
    /// Solve with the built-in branch and bound.
    SolveExact(SolveExactArgs),
    /// Check a solution file against an instance.
    Validate(ValidateArgs),
    /// Compare nonlinear and linearized charging decisions.
    CompareCharging(CompareArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    customers: usize,
    #[arg(long)]
    stations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of instances, using seeds `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output file for one instance, directory for several; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImportArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Add co-located slow station candidates drawn with this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PathsArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Stations per path; defaults to the station limit.
    #[arg(long)]
    max_stations: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    M1,
    M2,
    M3,
    M4,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Mps,
    Lp,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Extra copies per station in the node-copy models.
    #[arg(long, default_value_t = 1)]
    beta: usize,
    /// Replace every charging function by its linearization.
    #[arg(long)]
    linear: bool,
    /// Add the strengthening rows to the node-copy models.
    #[arg(long)]
    strengthen: bool,
}

#[derive(Args)]
struct BuildMipArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Defaults to the extension of `--out`, else MPS.
    #[arg(long, value_enum)]
    format: Option<ExportFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveMipArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Raise beta from 0 until the objective stops improving.
    #[arg(long)]
    escalate_beta: bool,
    #[arg(long, default_value_t = 5)]
    max_beta: usize,
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// JSON backend configuration; otherwise `ELRP_BACKEND` is used.
    #[arg(long)]
    backend_config: Option<PathBuf>,
    /// Write the backend's named variable values here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveExactArgs {
    /// Instance files or directories of `.json` instances.
    #[arg(long, required = true, num_args = 1..)]
    instance: Vec<PathBuf>,
    #[arg(long)]
    linear: bool,
    /// Search every recharge path instead of the pruned set.
    #[arg(long)]
    no_prune: bool,
    /// Seconds per instance.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Solution file for one instance, directory for several.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Exact,
    Backend,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, required = true, num_args = 1..)]
    instance: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Engine::Exact)]
    engine: Engine,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// CSV file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Import(a) => commands::import(a),
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Paths(a) => commands::paths(a),
        Command::BuildMip(a) => commands::build_mip(a),
        Command::SolveMip(a) => commands::solve_mip(a),
        Command::SolveExact(a) => commands::solve_exact(a),
        Command::Validate(a) => commands::validate(a),
        Command::CompareCharging(a) => commands::compare_charging(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
