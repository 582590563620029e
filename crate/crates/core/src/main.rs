//! `dcm-lab`: generate directed configuration-model graphs, measure their
//! hopcounts and compare them with the branching-process limit.

mod cli;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use cli::commands::{self, Failure, Session};
use cli::config::ExperimentConfig;
use dcm_lab::par::Execution;

#[derive(Parser, Debug)]
#[command(name = "dcm-lab", version, about)]
struct Cli {
    /// JSON file with any of the experiment fields; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism; 1 runs sequentially).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Record that outputs must not depend on the thread count. Work is always
    /// split into fixed chunks, so this holds with or without the flag.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample degree sequences and pair their stubs.
    Gen {
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Hopcount histogram of stored or freshly generated graphs.
    Hopcount {
        #[command(flatten)]
        cfg: ExperimentConfig,
        /// Graph files (DCMG, or edge lists ending in .txt/.edges).
        #[arg(long = "graph")]
        inputs: Vec<PathBuf>,
    },
    /// Limit-variable pools and the limiting hopcount CDF.
    Theory {
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Kolmogorov-Smirnov comparison of measured and limiting hopcounts.
    Compare {
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Failure frequency of the exploration/branching-process coupling.
    Coupling {
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Regularity check of a degree sequence against its law.
    Check {
        #[command(flatten)]
        cfg: ExperimentConfig,
        /// Existing sequence (DCMS, or CSV ending in .csv) instead of a fresh draw.
        #[arg(long)]
        degrees: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(p) => ExperimentConfig::load(p).map_err(Failure::Validation)?,
        None => ExperimentConfig::default(),
    };
    let flags = match &cli.command {
        Command::Gen { cfg } | Command::Theory { cfg } | Command::Compare { cfg } | Command::Coupling { cfg } => cfg,
        Command::Hopcount { cfg, .. } | Command::Check { cfg, .. } => cfg,
    };
    let cfg = flags.clone().over(file);

    let threads = match cli.threads {
        Some(0) => return Err(Failure::Validation("--threads must be at least 1".into())),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let exec = if threads == 1 { Execution::Sequential } else { Execution::Parallel };
    let session = Session {
        cfg,
        exec,
        threads,
        deterministic: cli.deterministic,
    };

    match &cli.command {
        Command::Gen { .. } => commands::gen(&session),
        Command::Hopcount { inputs, .. } => commands::hopcount(&session, inputs),
        Command::Theory { .. } => commands::theory(&session),
        Command::Compare { .. } => commands::compare_cmd(&session),
        Command::Coupling { .. } => commands::coupling(&session),
        Command::Check { degrees, .. } => commands::check(&session, degrees.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    // clap exits with status 2 on malformed arguments
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            error!("invalid input: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            error!("{msg}");
            ExitCode::from(3)
        }
    }
}
