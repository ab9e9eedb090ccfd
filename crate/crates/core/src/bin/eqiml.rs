use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eqiml::pipeline::{self, RunConfig};

#[derive(Parser)]
#[command(name = "eqiml", version, about = "Evolved quantum-inspired kernel classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the evolutionary search and write reports to the output directory.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Decode a genome bitstring and print its circuit.
    Inspect {
        #[arg(long)]
        genome: String,
        #[arg(long)]
        config: PathBuf,
    },
    /// Train only the MLP baseline.
    Baseline {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(cli: Cli) -> eqiml::Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::from_file(&config)?;
            let report = pipeline::run_pipeline(&cfg)?;
            for (name, acc) in &report.accuracies {
                println!("{name:>14}: test accuracy {acc:.4}");
            }
            println!("reports written to {}", cfg.output.display());
        }
        Command::Inspect { genome, config } => {
            let cfg = RunConfig::from_file(&config)?;
            print!("{}", pipeline::inspect(&genome, &cfg)?);
        }
        Command::Baseline { config } => {
            let cfg = RunConfig::from_file(&config)?;
            let report = pipeline::run_baseline(&cfg)?;
            println!(
                "baseline mlp: test accuracy {:.4} (train {:.4}, {} pca components)",
                report.test_accuracy, report.train_accuracy, report.pca_components
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Some(n) = std::env::var("EQIML_THREADS").ok().and_then(|v| v.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), e.detail());
            ExitCode::FAILURE
        }
    }
}
