use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use robust_hedge::harness::write_csv_to;
use robust_hedge::{report_json, run_experiment, run_suite, sweep, ExperimentConfig, RunOptions, SuiteSize};

#[derive(Parser)]
#[command(
    name = "robust-hedge",
    version,
    about = "Multiplicative weights under corrupted stochastic losses"
)]
struct Cli {
    /// Output path: the CSV for run and sweep, a JSON-lines copy of the reports for verify.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Base seed; overrides `base_seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one environment and aggregate per (algorithm, C, checkpoint).
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the cross product of gaps, algorithms and budgets.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the inequality certification suite; exits nonzero on any violation.
    Verify {
        /// Smaller input families, for smoke testing.
        #[arg(long)]
        quick: bool,
    },
}

fn load(cli: &Cli, path: &Path) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.base_seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output = Some(out.clone());
    }
    Ok(config)
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let options = RunOptions {
        threads: cli.threads.unwrap_or(0),
    };
    match &cli.command {
        Command::Run { config } | Command::Sweep { config } => {
            let cfg = load(&cli, config)?;
            let rows = if matches!(cli.command, Command::Run { .. }) {
                run_experiment(&cfg, options)?
            } else {
                sweep(&cfg, options)?
            };
            match &cfg.output {
                Some(path) => eprintln!("wrote {} rows to {}", rows.len(), path.display()),
                None => write_csv_to(std::io::stdout().lock(), &rows)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { quick } => {
            if let Some(threads) = cli.threads {
                rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
            }
            let size = if *quick { SuiteSize::QUICK } else { SuiteSize::FULL };
            let reports = run_suite(cli.seed.unwrap_or(0), size)?;
            let lines: Vec<String> = reports.iter().map(|r| report_json(r).to_string()).collect();
            let mut stdout = std::io::stdout().lock();
            for line in &lines {
                writeln!(stdout, "{line}")?;
            }
            if let Some(path) = &cli.out {
                std::fs::write(path, lines.join("\n") + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            let failed = reports.iter().filter(|r| !r.passed()).count();
            if failed > 0 {
                eprintln!("{failed} check(s) reported violations");
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
