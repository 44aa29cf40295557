use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rough_ideal_cli::config::parse_epsilons;
use rough_ideal_cli::{execute, Overrides, RunOptions};

#[derive(Parser)]
#[command(version, about = "Rough ideal convergence analyses from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every analysis in a config and write a report.
    Analyze {
        config: PathBuf,
        /// Report path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of grid classifications.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Window for empirical evidence (overrides the config).
        #[arg(long)]
        window: Option<u64>,
        /// Comma-separated epsilon schedule (overrides the config).
        #[arg(long, value_name = "E1,E2,...")]
        epsilons: Option<String>,
        /// Omit the timing block.
        #[arg(long)]
        no_timing: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let Command::Analyze {
        config,
        out,
        csv,
        window,
        epsilons,
        no_timing,
    } = cli.command;
    let epsilons = match epsilons.as_deref().map(parse_epsilons).transpose() {
        Ok(e) => e,
        Err(msg) => {
            eprintln!("error: --epsilons: {msg}");
            return ExitCode::from(3);
        }
    };
    let opts = RunOptions {
        config,
        out,
        csv,
        overrides: Overrides { window, epsilons },
        timing: !no_timing,
    };
    ExitCode::from(execute(&opts) as u8)
}
