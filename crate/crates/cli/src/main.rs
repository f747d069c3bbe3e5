use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kostin_cli::{list_scenarios, run, RunOptions};

/// Gaussian wave packets of the Kostin equation: trajectories, propagators
/// and direct solutions.
#[derive(Parser)]
#[command(name = "kostin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory, overriding the one in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress progress text.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a TOML file or by bundled name.
    Run { config: String },
    /// List bundled scenarios.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for name in list_scenarios() {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { config } => {
            let opts = RunOptions { out: cli.out, quiet: cli.quiet };
            match run(&config, &opts) {
                Ok(summary) if summary.all_pass() => ExitCode::SUCCESS,
                Ok(_) => {
                    eprintln!("some validations failed");
                    ExitCode::from(1)
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
