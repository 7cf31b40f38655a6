//! `drflow`: check, analyze, size and run dataflow graph files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(name = "drflow", version, about = "Dynamic-rate dataflow graph tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report design-rule violations, one per line.
    Check { path: PathBuf },
    /// Print the consistency report.
    Analyze {
        path: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print each FIFO's capacity and slot layout.
    Capacity {
        path: PathBuf,
        #[arg(long = "c-factor", default_value_t = 3)]
        c_factor: usize,
    },
    /// Run the graph on the threaded runtime.
    Run(commands::RunArgs),
    /// Write the corpus graphs and their golden digests.
    Corpus { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { path } => commands::check(&path),
        Command::Analyze { path, out } => commands::analyze(&path, out.as_deref()),
        Command::Capacity { path, c_factor } => commands::capacity(&path, c_factor),
        Command::Run(args) => commands::run(&args),
        Command::Corpus { dir } => commands::corpus(&dir),
    };
    match result {
        Ok(code) => code.into(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code().into()
        }
    }
}
