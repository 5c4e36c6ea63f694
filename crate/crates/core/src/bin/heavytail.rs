//! `heavytail run <spec.json> --out <dir>` and `heavytail validate <spec.json>`.
//!
//! Exit codes: 0 success, 1 runtime error, 2 invalid spec.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heavytail::bench::{run_experiment, write_outputs, BenchError, ExperimentSpec};

#[derive(Parser)]
#[command(name = "heavytail", version, about = "Run seeded heavy-tailed estimation studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write records.csv and summary.json.
    Run {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "HEAVYTAIL_THREADS")]
        threads: Option<usize>,
        /// Override the spec's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a spec file without running it.
    Validate { spec: PathBuf },
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

fn load(path: &Path) -> Result<ExperimentSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    let spec: ExperimentSpec = serde_json::from_str(&text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    spec.validate().map_err(|e| Failure::Invalid(e.to_string()))?;
    Ok(spec)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { spec } => {
            let s = load(&spec)?;
            println!("ok: {:?}, {} trials", s.scenario, s.trials);
            Ok(())
        }
        Command::Run {
            spec,
            out,
            threads,
            seed,
        } => {
            let mut s = load(&spec)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let outcome = run_experiment(&s, threads).map_err(|e| match e {
                BenchError::Validation(v) => Failure::Invalid(v.to_string()),
                other => Failure::Runtime(other.to_string()),
            })?;
            let (csv, json) = write_outputs(&outcome.records, &outcome.summary, &out)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            for est in &outcome.summary.estimators {
                println!(
                    "{:<16} n={:<5} median={:.4} mean={:.4}",
                    est.estimator,
                    est.count,
                    est.median.unwrap_or(f64::NAN),
                    est.mean.unwrap_or(f64::NAN)
                );
            }
            println!("wrote {} and {}", csv.display(), json.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
