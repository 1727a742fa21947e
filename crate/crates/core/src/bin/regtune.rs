use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use regtune::cli::{run, Command, GenFlags, GlobalArgs};

#[derive(Parser)]
#[command(name = "regtune", version, about = "Multi-task regularization tuning and its generalization bounds")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON config for the subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a problem instance.
    Gen {
        #[arg(long = "T")]
        t: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "nv")]
        n_v: Option<usize>,
    },
    /// Fit one estimator on one task.
    Solve,
    /// Select the hyperparameter by validation ERM.
    Tune,
    /// Evaluate a generalization bound.
    Bounds,
    /// Run a sweep or scaling study.
    Experiment,
    /// Run the acceptance suite twice and compare outputs.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Gen { t, d, n, n_v } => Command::Gen(GenFlags { t, d, n, n_v }),
        Cmd::Solve => Command::Solve,
        Cmd::Tune => Command::Tune,
        Cmd::Bounds => Command::Bounds,
        Cmd::Experiment => Command::Experiment,
        Cmd::Verify => Command::Verify,
    };
    let globals = GlobalArgs {
        config: cli.config,
        seed: cli.seed,
        out: cli.out,
        workers: cli.workers,
    };
    match run(&command, &globals) {
        Ok(s) if s.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
