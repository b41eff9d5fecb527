use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use launch_order::explorer::DEFAULT_MAX_KERNELS;
use launch_order_cli::commands::DEFAULT_BINS;
use launch_order_cli::{cmd_explore, cmd_rank, cmd_schedule, cmd_simulate, RunConfig};

/// Plan and evaluate launch orders for concurrent GPU kernels.
#[derive(Parser)]
#[command(name = "launch-order", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a launch order with the greedy round scheduler.
    Schedule(Common),
    /// Simulate an order (from --order, else the document's kernel order).
    Simulate(Common),
    /// Sweep all permutations and rank the scheduler's order.
    Explore(Common),
    /// Rank an order (from --order, else the scheduler's) among all permutations.
    Rank(Common),
}

#[derive(Args)]
struct Common {
    /// Run document with the kernel set (JSON).
    #[arg(long)]
    kernels: PathBuf,
    /// GPU preset name or path to a GPU spec file; overrides the document.
    #[arg(long)]
    gpu: Option<String>,
    /// Largest kernel count to sweep exhaustively (hard cap 10).
    #[arg(long, default_value_t = DEFAULT_MAX_KERNELS)]
    max_perms: usize,
    /// Directory for output files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Histogram bin count.
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Order file written by `schedule`.
    #[arg(long)]
    order: Option<PathBuf>,
}

impl From<Common> for RunConfig {
    fn from(c: Common) -> Self {
        RunConfig {
            kernels: c.kernels,
            gpu: c.gpu,
            max_perms: c.max_perms,
            out: c.out,
            bins: c.bins,
            order: c.order,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Schedule(c) => cmd_schedule(&c.into()),
        Command::Simulate(c) => cmd_simulate(&c.into()),
        Command::Explore(c) => cmd_explore(&c.into()),
        Command::Rank(c) => cmd_rank(&c.into()),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
