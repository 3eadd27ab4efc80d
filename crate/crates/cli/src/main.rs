use std::path::PathBuf;
use std::process::ExitCode;

use adamdo_core::harness::{build_problem, compare_runs, load_config, run_experiment};
use adamdo_core::{Error, TopologyKind};
use clap::{Parser, Subcommand};

/// Decentralized adaptive momentum optimization experiments.
#[derive(Debug, Parser)]
#[command(name = "adamdo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write its trace.
    Run { config: PathBuf },
    /// Align the stationary gaps of two or more traces and rank them.
    Compare {
        #[arg(required = true, num_args = 2..)]
        traces: Vec<PathBuf>,
    },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// Print the spectral mixing rate of a topology.
    Nu { topology: String, m: usize },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Divergence { .. } => 2,
        Error::Io { .. } => 3,
        _ => 1,
    }
}

fn execute(command: Command) -> Result<String, Error> {
    match command {
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            Ok(run_experiment(&cfg)?.summary_line())
        }
        Command::Compare { traces } => Ok(compare_runs(&traces)?.render()),
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            let problem = build_problem(&cfg)?;
            let errors = cfg.violations(problem.components());
            if !errors.is_empty() {
                return Err(Error::Config(errors));
            }
            cfg.topology.build(cfg.nodes)?;
            Ok(format!(
                "{}: ok ({} nodes, n = {}, d = {})",
                config.display(),
                cfg.nodes,
                problem.components(),
                problem.dim()
            ))
        }
        Command::Nu { topology, m } => {
            let kind: TopologyKind = topology.parse()?;
            Ok(format!("{}", kind.build(m)?.nu()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(out) => {
            println!("{}", out.trim_end());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
