//! `mpath`: validate networks, compute M-path routing lists and simulate key
//! relaying over them.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "mpath", version, about = "Multi-path key routing for trusted-node QKD networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check connectivity and node degrees against M.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        hop_limit: Option<usize>,
    },
    /// Run the routing algorithm and write its artifacts.
    Route(RouteArgs),
    /// List the candidate M-path sets of one pair with their deficiencies.
    Paths {
        #[arg(long)]
        input: PathBuf,
        i: usize,
        j: usize,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        hop_limit: Option<usize>,
    },
    /// Simulate key relaying over a routing list.
    Simulate(SimulateArgs),
}

/// Router parameters that override the network file.
#[derive(Args, Clone, Default)]
pub struct Overrides {
    /// Rate increment in kbit/s.
    #[arg(long)]
    pub delta_r: Option<f64>,
    #[arg(long)]
    pub r_max: Option<u64>,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub hop_limit: Option<usize>,
}

#[derive(Args)]
pub struct RouteArgs {
    #[arg(long, required_unless_present = "manifest")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Independent runs as `dr[@seed],...`, e.g. `0.1@0,0.05@0,0.01`.
    #[arg(long, conflicts_with = "manifest")]
    pub sweep: Option<String>,
    /// Re-run the input and configuration recorded in a manifest.
    #[arg(long, conflicts_with_all = ["input", "delta_r", "r_max", "m", "hop_limit"])]
    pub manifest: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `routing_list.json` from `route`; routes in-process when absent.
    #[arg(long)]
    pub routing: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Accumulation time in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Compromised nodes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub compromise: Vec<usize>,
    /// Per-node compromise probability for the leak bound.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Print every pair key in hex, as computed at the lower endpoint.
    #[arg(long)]
    pub dump_keys: bool,
    /// Writes `simulation_report.json` here when given.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { input, m, hop_limit } => commands::validate(&input, m, hop_limit),
        Command::Route(args) => commands::route(&args),
        Command::Paths {
            input,
            i,
            j,
            m,
            hop_limit,
        } => commands::paths(&input, i, j, m, hop_limit),
        Command::Simulate(args) => commands::simulate(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if commands::is_validation_failure(&e) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
