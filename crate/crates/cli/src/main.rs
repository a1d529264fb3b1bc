use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

mod commands;
mod report;

use commands::Command;

/// Verification and geometry workflows for finite-dimensional non-commutative probability.
///
/// Exit status: 0 when every checked property holds, 1 on a property failure, 2 on bad input.
#[derive(Parser, Debug)]
#[command(name = "ncp-lab", version)]
pub struct Cli {
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override the pass threshold of the main check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override the number of random samples or trials.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn configure_threads() {
    if let Some(n) = std::env::var("NCP_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            // fails only if a pool already exists
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let opts = commands::Options {
        seed: cli.seed,
        tol: cli.tol,
        samples: cli.samples,
    };
    match commands::run(&cli.command, &opts) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report.to_json())
                .expect("JSON values serialize")
                + "\n";
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &text),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("ncp-lab: cannot write report: {e}");
                return ExitCode::from(2);
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("ncp-lab: {e}");
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
