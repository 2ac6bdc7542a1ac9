use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qonn::runner::{
    evaluate_checkpoint, load_checkpoint, load_probes, run_experiment, run_sweep, ExperimentConfig, RunStatus,
};

/// Train and evaluate quantum optical neural networks from JSON configs.
#[derive(Parser)]
#[command(name = "qonn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(RunArgs),
    /// Run every point of the config's sweep.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Points run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Feed probe states through a saved checkpoint.
    Eval {
        checkpoint: PathBuf,
        /// JSON list of states `{ "n", "m", "amplitudes": [[re, im], …] }`.
        probes: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config =
            ExperimentConfig::from_path(&self.config).with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        Ok(config)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(args) => {
            let config = args.load()?;
            let record = run_experiment(&config, &config.output_dir)?;
            println!("{}", serde_json::to_string_pretty(&record.metrics)?);
            if let Some(e) = &record.error {
                eprintln!("run failed: {e}");
            }
            Ok(record.status == RunStatus::Ok)
        }
        Command::Sweep { run, jobs } => {
            let config = run.load()?;
            let summary = run_sweep(&config, &config.output_dir, jobs)?;
            for p in &summary.points {
                match &p.error {
                    Some(e) => println!("{} = {}: failed ({e})", summary.axis, p.value),
                    None => println!("{} = {}: ok", summary.axis, p.value),
                }
            }
            Ok(summary.failures() == 0)
        }
        Command::Eval { checkpoint, probes } => {
            let model = load_checkpoint(&checkpoint).with_context(|| format!("loading {}", checkpoint.display()))?;
            let probes = load_probes(&probes).with_context(|| format!("loading {}", probes.display()))?;
            let outputs = evaluate_checkpoint(&model, &probes)?;
            println!("{}", serde_json::to_string_pretty(&outputs)?);
            Ok(true)
        }
    }
}
