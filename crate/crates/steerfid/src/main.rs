//! Command-line driver for separability-fidelity estimation: variational
//! runs, semidefinite benchmarks, brute-force oracles, and a consistency
//! harness that cross-checks all of them.

mod commands;
mod config;
mod fail;
mod output;
mod state;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use steerfid_core::vqsa::RewardKind;

use commands::Run;
use config::{Overrides, ShotsField};
use fail::Failure;

#[derive(Parser)]
#[command(
    name = "steerfid",
    version,
    about = "Estimates the fidelity of separability of small quantum states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the variational steering estimator and write its trace.
    Estimate(SharedArgs),
    /// Solve one of the semidefinite relaxation benchmarks.
    Benchmark(BenchmarkArgs),
    /// Search pure-state decompositions by brute force.
    Oracle(SharedArgs),
    /// Run the oracle and both benchmarks, then cross-check the ordering.
    Compare(SharedArgs),
}

#[derive(Args)]
struct SharedArgs {
    /// State to analyze: a state JSON file, or a named constructor such as
    /// bell_mixture(0.75,0.25), ghz(3), depolarized_ghz4(0.7), or
    /// hea_random(3,7,2).
    #[arg(long)]
    state: String,
    /// JSON file with run settings (partitions, vqsa, oracle, k).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory receiving the output files.
    #[arg(long)]
    out: PathBuf,
    /// Extension level for the semidefinite benchmarks.
    #[arg(long)]
    k: Option<usize>,
    /// Seed override for all stochastic components.
    #[arg(long)]
    seed: Option<u64>,
    /// Reward evaluations per estimate: a shot count or "exact".
    #[arg(long)]
    shots: Option<String>,
    /// Acceptance observable driving the optimization.
    #[arg(long, value_enum)]
    reward: Option<RewardArg>,
    /// Purifying reference dimension (power of two, at least the state rank).
    #[arg(long)]
    ref_dim: Option<usize>,
    /// Outcome count of the oracle's decomposing unitary.
    #[arg(long)]
    decomposition_dim: Option<usize>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Which relaxation to solve.
    #[arg(long, value_enum)]
    pipeline: BenchPipeline,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchPipeline {
    Benchmark1,
    Benchmark2,
}

#[derive(Clone, Copy, ValueEnum)]
enum RewardArg {
    Global,
    Local,
}

fn build_run(args: &SharedArgs) -> Result<Run, Failure> {
    let spec = state::resolve_state(&args.state)?;
    let file = config::FileConfig::load(args.config.as_deref())?;
    let shots = args.shots.as_deref().map(ShotsField::parse).transpose()?;
    let overrides = Overrides {
        seed: args.seed,
        shots,
        reward: args.reward.map(|r| match r {
            RewardArg::Global => RewardKind::Global,
            RewardArg::Local => RewardKind::Local,
        }),
        ref_dim: args.ref_dim,
        decomposition_dim: args.decomposition_dim,
    };
    Ok(Run {
        spec,
        file,
        overrides,
        out: args.out.clone(),
        k: args.k,
    })
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Estimate(args) => commands::cmd_estimate(&build_run(args)?),
        Command::Benchmark(args) => {
            let run = build_run(&args.shared)?;
            let pipeline = match args.pipeline {
                BenchPipeline::Benchmark1 => "benchmark1",
                BenchPipeline::Benchmark2 => "benchmark2",
            };
            commands::cmd_benchmark(&run, pipeline)
        }
        Command::Oracle(args) => commands::cmd_oracle(&build_run(args)?),
        Command::Compare(args) => commands::cmd_compare(&build_run(args)?),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = dispatch(&cli) {
        eprintln!("error: {failure}");
        std::process::exit(failure.exit_code());
    }
}
