//! Seeded parallel trials, aggregation and CSV output.
//!
//! Trial `k` of an experiment draws its clean losses from a ChaCha8 stream
//! seeded with [`trial_seed`]`(base_seed, k)`. The only consumer of that
//! stream is the Bernoulli sampler, so every algorithm and every corruption
//! budget sees the same clean losses for the same trial index. Workers share
//! nothing; results are gathered by trial index and reduced in that order, so
//! the output does not depend on the thread count.

use std::fs::File;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use robust_hedge_core::{
    simulate, CorruptionStrategy, Learner, LearnerKind, RecordPolicy, StepSchedule, StochasticSpec, TrialTrace,
};
use serde::{Deserialize, Serialize};

use crate::config::{AlgorithmConfig, CorruptionConfig, ExperimentConfig};
use crate::error::{HarnessError, Result};

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed: `splitmix64(base_seed ^ splitmix64(trial))`.
pub fn trial_seed(base_seed: u64, trial: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(trial))
}

pub fn trial_rng(base_seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(base_seed, trial))
}

/// One (algorithm, environment, budget) cell of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub algorithm: LearnerKind,
    pub schedule: StepSchedule,
    pub spec: StochasticSpec,
    pub corruption: CorruptionConfig,
    pub budget: f64,
}

impl Scenario {
    pub fn new(
        algorithm: &AlgorithmConfig,
        spec: StochasticSpec,
        corruption: CorruptionConfig,
        budget: f64,
    ) -> Result<Self> {
        Ok(Scenario {
            algorithm: algorithm.learner_kind()?,
            schedule: algorithm.schedule(spec.experts(), spec.gap())?,
            spec,
            corruption,
            budget,
        })
    }

    pub fn corruption_strategy(&self) -> Result<CorruptionStrategy> {
        Ok(match self.corruption {
            CorruptionConfig::None => CorruptionStrategy::none(),
            CorruptionConfig::FrontLoad => CorruptionStrategy::front_load(self.budget, self.spec.best())?,
        })
    }

    pub fn run_trial(&self, base_seed: u64, trial: u64, horizon: u64, policy: RecordPolicy) -> Result<TrialTrace> {
        let wrap = |source| HarnessError::Trial {
            algorithm: self.algorithm.name(),
            budget: self.budget,
            trial,
            source,
        };
        let learner = Learner::new(self.algorithm, self.schedule, self.spec.experts()).map_err(wrap)?;
        let mut corruption = self.corruption_strategy()?;
        let mut rng = trial_rng(base_seed, trial);
        simulate(learner, &self.spec, &mut corruption, &mut rng, horizon, policy).map_err(wrap)
    }
}

/// Runs one trial of `algorithm` with budget `budget` on the config's first environment.
/// Plays are stored on a logarithmic grid of rounds.
pub fn run_trial(
    config: &ExperimentConfig,
    algorithm: &AlgorithmConfig,
    budget: f64,
    trial: u64,
) -> Result<TrialTrace> {
    config.validate()?;
    let spec = config.environments()?.remove(0);
    Scenario::new(algorithm, spec, config.corruption, budget)?.run_trial(
        config.base_seed,
        trial,
        config.horizon,
        RecordPolicy::LogGrid,
    )
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub delta: f64,
    #[serde(rename = "C")]
    pub budget: f64,
    #[serde(rename = "T_checkpoint")]
    pub checkpoint: u64,
    pub trials: u64,
    pub mean_pseudo_regret: f64,
    pub stderr_pseudo_regret: f64,
    pub mean_corruption_spent: f64,
}

pub const CSV_HEADER: &str =
    "algorithm,N,delta,C,T_checkpoint,trials,mean_pseudo_regret,stderr_pseudo_regret,mean_corruption_spent";

/// Mean and standard error of the mean, summed in slice order.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; 0 uses rayon's default.
    pub threads: usize,
}

/// Pseudo regret and corruption spend of one trial at each checkpoint.
struct CheckpointSample {
    regret: Vec<f64>,
    spent: Vec<f64>,
}

fn scenarios(config: &ExperimentConfig) -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    for spec in config.environments()? {
        for algorithm in &config.algorithms {
            for &budget in &config.budgets {
                out.push(Scenario::new(algorithm, spec.clone(), config.corruption, budget)?);
            }
        }
    }
    Ok(out)
}

fn execute(config: &ExperimentConfig, options: RunOptions) -> Result<Vec<AggregateRow>> {
    config.validate()?;
    let checkpoints = config.checkpoint_rounds()?;
    let cells = scenarios(config)?;
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..config.trials).map(move |k| (c, k)))
        .collect();

    let run = || -> Result<Vec<CheckpointSample>> {
        jobs.par_iter()
            .map(|&(c, k)| {
                let trace = cells[c].run_trial(config.base_seed, k, config.horizon, RecordPolicy::None)?;
                Ok(CheckpointSample {
                    regret: checkpoints
                        .iter()
                        .map(|&t| trace.pseudo_regret_at(t as usize))
                        .collect(),
                    spent: checkpoints.iter().map(|&t| trace.corruption_at(t as usize)).collect(),
                })
            })
            .collect()
    };
    let samples = if options.threads == 0 {
        run()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(options.threads)
            .build()?
            .install(run)?
    };

    let trials = config.trials as usize;
    let mut rows = Vec::with_capacity(cells.len() * checkpoints.len());
    for (c, cell) in cells.iter().enumerate() {
        let block = &samples[c * trials..(c + 1) * trials];
        for (j, &t) in checkpoints.iter().enumerate() {
            let regrets: Vec<f64> = block.iter().map(|s| s.regret[j]).collect();
            let spent: Vec<f64> = block.iter().map(|s| s.spent[j]).collect();
            let (mean, stderr) = mean_and_stderr(&regrets);
            rows.push(AggregateRow {
                algorithm: cell.algorithm.name().to_owned(),
                n: cell.spec.experts(),
                delta: cell.spec.gap(),
                budget: cell.budget,
                checkpoint: t,
                trials: config.trials,
                mean_pseudo_regret: mean,
                stderr_pseudo_regret: stderr,
                mean_corruption_spent: mean_and_stderr(&spent).0,
            });
        }
    }
    Ok(rows)
}

fn open_output(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes the header and `rows` in order.
pub fn write_csv_to<W: std::io::Write>(out: W, rows: &[AggregateRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if rows.is_empty() {
        writer.write_record(CSV_HEADER.split(','))?;
    }
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| HarnessError::Csv(e.into()))?;
    Ok(())
}

fn execute_to_output(config: &ExperimentConfig, options: RunOptions) -> Result<Vec<AggregateRow>> {
    config.validate()?;
    // fail on an unwritable path before spending any compute
    let file = config.output.as_deref().map(open_output).transpose()?;
    let rows = execute(config, options)?;
    if let Some(file) = file {
        write_csv_to(file, &rows)?;
    }
    Ok(rows)
}

/// Aggregates for each (algorithm, budget, checkpoint) of a single-environment
/// config, written to `config.output` when set.
pub fn run_experiment(config: &ExperimentConfig, options: RunOptions) -> Result<Vec<AggregateRow>> {
    if config.deltas.as_ref().is_some_and(|d| d.len() != 1) {
        return Err(HarnessError::Config(
            "run takes a single environment; use sweep for a gap grid".into(),
        ));
    }
    execute_to_output(config, options)
}

/// Cross product of gaps, algorithms and budgets in one dataset.
pub fn sweep(config: &ExperimentConfig, options: RunOptions) -> Result<Vec<AggregateRow>> {
    execute_to_output(config, options)
}
