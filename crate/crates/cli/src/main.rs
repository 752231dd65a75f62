//! `pfk`: condition checks, factor search and exhaustive sweeps over graph6
//! streams. Records go to stdout as JSON lines, summaries to stderr.
//!
//! Exit codes: `check` 0 holds / 1 violated / 2 error; `solve` 0 factor /
//! 1 none / 2 error; `sweep` 1 iff an assertion failed; `extremal` 1 iff a
//! family failed verification; usage and I/O errors always give 2.

mod check;
mod conjecture;
mod extremal;
mod input;
mod solve;
mod stream;
mod sweep;

use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pathfactor::deficiency::{SweepConfig, DEFAULT_MAX_SUBSETS};
use pathfactor::factor::SolverConfig;

use crate::input::InputArgs;
use crate::stream::Context;

#[derive(Debug, Parser)]
#[command(name = "pfk", version, about = "Path-factor conditions, solvers and sweeps")]
struct Cli {
    /// Worker threads.
    #[arg(long, global = true, env = "PFK_JOBS", default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    /// Graphs with more vertices are reported as over budget.
    #[arg(long, global = true, default_value_t = 32)]
    max_n: usize,
    /// Largest number of vertex subsets a single condition sweep may visit.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_SUBSETS)]
    max_subsets: u64,
    /// Search-node budget of the exact solver, per graph.
    #[arg(long, global = true, default_value_t = SolverConfig::default().max_nodes)]
    max_nodes: u64,
    /// Add per-record wall-clock times (makes output nondeterministic).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the deficiency conditions.
    Check(InputArgs),
    /// Search for a path factor with prescribed orders.
    Solve(solve::SolveArgs),
    /// Check a universally quantified assertion over a stream.
    Sweep(sweep::SweepArgs),
    /// Verify the extremal families.
    Extremal(extremal::ExtremalArgs),
    /// Search a stream for counterexamples to the {P2, P(2k+1)} conjecture.
    Conjecture(conjecture::ConjectureArgs),
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let ctx = Context {
        pool: rayon::ThreadPoolBuilder::new().num_threads(cli.jobs as usize).build()?,
        sweep: SweepConfig { max_subsets: cli.max_subsets },
        solver: SolverConfig { max_nodes: cli.max_nodes, ..SolverConfig::default() },
        max_n: cli.max_n,
        timings: cli.timings,
    };
    let mut out = BufWriter::new(io::stdout().lock());
    let code = match &cli.command {
        Command::Check(args) => check::run(&ctx, args, &mut out),
        Command::Solve(args) => solve::run(&ctx, args, &mut out),
        Command::Sweep(args) => sweep::run(&ctx, args, &mut out),
        Command::Extremal(args) => extremal::run(&ctx, args, &mut out),
        Command::Conjecture(args) => conjecture::run(&ctx, args, &mut out),
    }?;
    out.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
