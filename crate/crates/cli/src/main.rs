use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use extreme_chains_cli::{run_experiment, CliError, Experiment};

#[derive(Parser)]
#[command(name = "extreme-chains", version, about = "Simulate and check extremes of Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn execute(config: PathBuf, out: PathBuf, workers: Option<usize>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&config)
        .map_err(|e| CliError::Io(format!("{}: {e}", config.display())))?;
    let experiment = Experiment::parse(&text)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    let manifest = pool.install(|| run_experiment(&experiment, &out))?;
    for o in &manifest.outputs {
        println!("{} {} rows", out.join(&o.file).display(), o.rows);
    }
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let Cli { command: Command::Run { config, out, workers } } = Cli::parse();
    match execute(config, out, workers) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({ "category": e.category(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
