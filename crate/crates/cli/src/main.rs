use std::path::PathBuf;
use std::process::ExitCode;

use ckg_cli::commands::{cmd_certify, cmd_check, cmd_solve, cmd_verify};
use ckg_cli::exit;
use clap::{Parser, Subcommand};

/// Dirichlet problems for prescribed mean curvature graphs along a conformal
/// Killing field.
#[derive(Parser)]
#[command(name = "ckg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem and write solution.csv, report.json, log.jsonl and
    /// mesh.json to the output directory.
    Solve {
        problem: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Refuse to solve when the existence hypotheses fail.
        #[arg(long)]
        strict: bool,
    },
    /// Evaluate the existence hypotheses and print them as JSON.
    Check { problem: PathBuf },
    /// Search for barrier certificates and check them against a solution.
    Certify {
        problem: PathBuf,
        solution: PathBuf,
        /// Also write the certificates to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the mean curvature of a solution with the prescribed one.
    Verify { problem: PathBuf, solution: PathBuf },
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("CKG_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("CKG_THREADS must be a positive integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(exit::INPUT as u8);
    }
    let code = match &cli.command {
        Command::Solve { problem, out, strict } => cmd_solve(problem, out, *strict),
        Command::Check { problem } => cmd_check(problem),
        Command::Certify { problem, solution, out } => cmd_certify(problem, solution, out.as_ref()),
        Command::Verify { problem, solution } => cmd_verify(problem, solution),
    };
    ExitCode::from(code as u8)
}
