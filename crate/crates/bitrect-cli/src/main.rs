//! Command-line front end: solving, verification, bounds, benchmark
//! generation, batch evaluation, Kronecker products, and addressing
//! schedules for binary matrices in the line-per-row text format.
//!
//! Exit codes: 0 success, 1 semantic failure (e.g. invalid partition),
//! 2 input error, 3 time limit reached (the anytime result is still
//! written), 4 resource guard tripped.

use bitrect_cli::{bench, bounds, eval, kron, schedule, solve, verify};
use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bitrect", version, about = "Minimum rectangle partitions of binary matrices")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Solve a matrix: heuristic warm start, then exact refinement
    Solve(solve::SolveArgs),
    /// Check a partition file against a matrix
    Verify(verify::VerifyArgs),
    /// Print the rank of the matrix over the rationals
    Rank(bounds::RankArgs),
    /// Print lower bounds: real rank and fooling-set sizes
    Bounds(bounds::BoundsArgs),
    /// Generate benchmark suites into a directory
    Bench(bench::BenchArgs),
    /// Evaluate heuristics and the exact solver over a generated suite
    Eval(eval::EvalArgs),
    /// Emit the row/column activation schedule for a matrix
    Schedule(schedule::ScheduleArgs),
    /// Kronecker products: emit the product matrix or check its bounds
    Kron(kron::KronArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Commands::Solve(args) => solve::run(&args),
        Commands::Verify(args) => verify::run(&args),
        Commands::Rank(args) => bounds::run_rank(&args),
        Commands::Bounds(args) => bounds::run_bounds(&args),
        Commands::Bench(args) => bench::run(&args),
        Commands::Eval(args) => eval::run(&args),
        Commands::Schedule(args) => schedule::run(&args),
        Commands::Kron(args) => kron::run(&args),
    };
    ExitCode::from(code)
}
