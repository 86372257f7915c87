use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use replicalab_cli::experiments::RunOptions;

#[derive(Parser)]
#[command(name = "replicalab", version, about = "Replicability experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Replace one config entry; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Allow long-running experiments.
        #[arg(long)]
        slow: bool,
    },
}

fn main() -> ExitCode {
    let Command::Run { config, overrides, slow } = Cli::parse().command;
    match replicalab_cli::run_file(&config, &overrides, RunOptions { slow }) {
        Ok(summary) => {
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
