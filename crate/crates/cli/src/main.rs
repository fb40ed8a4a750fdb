use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use keygraph_cli::{cmd_derive, cmd_sweep, cmd_threshold, cmd_trial, CliError, ConfigFile, Overrides};

#[derive(Parser)]
#[command(name = "keygraph", version, about = "Heterogeneous secure WSN connectivity experiments")]
struct Cli {
    /// Experiment configuration (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overrides run.master_seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, overrides run.workers
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output CSV path, overrides run.output_path
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print derived quantities for the base model
    Derive,
    /// Print the predicted threshold of the sweep family
    Threshold,
    /// Run the sweep and write CSV
    Sweep,
    /// Run trials on the base model
    Trial {
        /// Write the first sampled graph as an edge list
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let overrides = Overrides {
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out.clone(),
    };
    let config = overrides.apply(&ConfigFile::load(path)?);
    match &cli.command {
        Command::Derive => cmd_derive(&config),
        Command::Threshold => cmd_threshold(&config),
        Command::Sweep => cmd_sweep(&config),
        Command::Trial { dump } => cmd_trial(&config, dump.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("keygraph: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
