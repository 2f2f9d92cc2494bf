//! The certification suite behind the `verify` subcommand.
//!
//! Each family draws its inputs from its own seed, `trial_seed(seed, family)`,
//! and instance `k` of the family from `trial_seed(family_seed, k)`. Instances
//! run in parallel and are merged in index order into one report per family.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use robust_hedge_core::verify::{
    check_adaptive_divergence, check_adaptive_regret_inequality, check_entropy_lemma, check_fixed_equivalence,
    check_observations, check_second_order_bound, check_stability_ratio, check_sum_bounds, entropy_lemma_tau0,
    EntropySample, SLACK_TOLERANCE,
};
use robust_hedge_core::{
    lower_bound_horizon, lower_bound_instance, trajectory, Learner, LearnerKind, ProbabilityVector, RecordPolicy,
    StepSchedule, StochasticSpec, TrialTrace, ViolationReport,
};
use serde_json::{json, Value};

use crate::config::CorruptionConfig;
use crate::error::Result;
use crate::harness::{trial_rng, trial_seed, Scenario};

/// Gap and corruption level of the instance on which adaptive FTRL and OMD must separate.
pub const DIVERGENCE_DELTA: f64 = 0.01;
pub const DIVERGENCE_BUDGET: u64 = 2000;
/// Required separation between the adaptive FTRL and OMD trajectories.
pub const DIVERGENCE_THRESHOLD: f64 = 0.1;

/// How many random instances each family draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteSize {
    pub sequences: usize,
    pub entropy_samples: usize,
    pub traces: usize,
}

impl SuiteSize {
    pub const FULL: SuiteSize = SuiteSize {
        sequences: 1000,
        entropy_samples: 100_000,
        traces: 1000,
    };

    /// A reduced run for smoke tests.
    pub const QUICK: SuiteSize = SuiteSize {
        sequences: 40,
        entropy_samples: 2000,
        traces: 40,
    };
}

fn family<F>(
    name: &str,
    tolerance: f64,
    seed: u64,
    family_id: u64,
    count: usize,
    instance: F,
) -> Result<ViolationReport>
where
    F: Fn(u64, &mut ChaCha8Rng) -> Result<ViolationReport> + Sync,
{
    let base = trial_seed(seed, family_id);
    let reports: Vec<ViolationReport> = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(base, k);
            Ok(instance(k, &mut rng)?.with_seed(trial_seed(base, k)))
        })
        .collect::<Result<_>>()?;
    let mut merged = ViolationReport::new(name, tolerance);
    for r in reports {
        merged.merge(r);
    }
    merged.digest.seed = Some(seed);
    Ok(merged)
}

fn signed_sequence(rng: &mut ChaCha8Rng, rounds: usize, n: usize) -> Vec<Vec<f64>> {
    (0..rounds)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect()
}

fn bernoulli_sequence(rng: &mut ChaCha8Rng, rounds: usize, n: usize) -> Vec<Vec<f64>> {
    let means: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    (0..rounds)
        .map(|_| {
            means
                .iter()
                .map(|&m| if rng.gen::<f64>() < m { 1.0 } else { 0.0 })
                .collect()
        })
        .collect()
}

fn alternating(rounds: usize) -> Vec<Vec<f64>> {
    (0..rounds)
        .map(|t| if t % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
        .collect()
}

fn adaptive_ftrl_plays(g: &[Vec<f64>]) -> Result<Vec<ProbabilityVector>> {
    let n = g[0].len();
    let learner = Learner::new(LearnerKind::AdaptiveFtrl, StepSchedule::default_adaptive(n)?, n)?;
    Ok(trajectory(learner, g)?)
}

/// Adaptive FTRL with the default schedule on a front-loaded corrupted stochastic instance, all rounds recorded.
pub fn adaptive_ftrl_trace(
    spec: &StochasticSpec,
    budget: f64,
    seed: u64,
    trial: u64,
    horizon: u64,
) -> Result<TrialTrace> {
    let scenario = Scenario {
        algorithm: LearnerKind::AdaptiveFtrl,
        schedule: StepSchedule::default_adaptive(spec.experts())?,
        spec: spec.clone(),
        corruption: CorruptionConfig::FrontLoad,
        budget,
    };
    scenario.run_trial(seed, trial, horizon, RecordPolicy::All)
}

/// Gap drawn log-uniformly from `[0.01, 1]`.
fn random_gap(rng: &mut ChaCha8Rng) -> f64 {
    (rng.gen_range(0.01f64.ln()..=0.0)).exp()
}

fn random_instance(rng: &mut ChaCha8Rng, max_experts: usize) -> Result<StochasticSpec> {
    let n = rng.gen_range(2..=max_experts);
    let delta = random_gap(rng);
    let best = rng.gen_range(0..n);
    let low = rng.gen_range(0.0..=1.0 - delta);
    let means = (0..n)
        .map(|i| {
            if i == best {
                low
            } else {
                rng.gen_range(low + delta..=1.0)
            }
        })
        .collect();
    Ok(StochasticSpec::new(means)?)
}

pub fn second_order_bound(seed: u64, size: SuiteSize) -> Result<ViolationReport> {
    let mut report = family(
        "second_order_bound",
        SLACK_TOLERANCE,
        seed,
        1,
        size.sequences,
        |_, rng| Ok(check_second_order_bound(&signed_sequence(rng, 500, 8), 0.1)?),
    )?;
    report.merge(check_second_order_bound(&alternating(10_000), 0.5)?);
    report.merge(check_second_order_bound(&vec![vec![0.0; 4]; 100], 0.7)?);
    Ok(report)
}

pub fn adaptive_regret_inequality(seed: u64, size: SuiteSize) -> Result<ViolationReport> {
    let mut report = family(
        "adaptive_regret_inequality",
        SLACK_TOLERANCE,
        seed,
        2,
        size.sequences,
        |k, rng| {
            let n = [2, 8, 32][(k % 3) as usize];
            Ok(check_adaptive_regret_inequality(&bernoulli_sequence(rng, 2000, n))?)
        },
    )?;
    let signed = family(
        "adaptive_regret_inequality",
        SLACK_TOLERANCE,
        seed,
        3,
        size.sequences / 10,
        |_, rng| {
            let n = rng.gen_range(2..=16);
            Ok(check_adaptive_regret_inequality(&signed_sequence(rng, 1000, n))?)
        },
    )?;
    report.merge(signed);
    report.merge(check_adaptive_regret_inequality(&alternating(10_000))?);
    report.merge(check_adaptive_regret_inequality(&vec![vec![0.0; 3]; 100])?);
    Ok(report)
}

/// Simplex-uniform point from normalized exponential spacings.
fn simplex_uniform(rng: &mut ChaCha8Rng, n: usize) -> Result<ProbabilityVector> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    Ok(ProbabilityVector::new(e.into_iter().map(|x| x / total).collect())?)
}

pub fn entropy_lemma(seed: u64, size: SuiteSize) -> Result<ViolationReport> {
    // batches keep the per-instance overhead small
    const BATCH: usize = 100;
    let batches = size.entropy_samples.div_ceil(BATCH);
    family("entropy_lemma", SLACK_TOLERANCE, seed, 4, batches, |_, rng| {
        let samples = (0..BATCH)
            .map(|_| {
                let n = rng.gen_range(2..=64);
                let delta = rng.gen_range(0.01..=1.0);
                let tau0 = entropy_lemma_tau0(delta, n);
                let tau = tau0 * rng.gen_range(0.0..=100f64.ln()).exp();
                let mut p = simplex_uniform(rng, n)?;
                // half the samples concentrate on the best expert, where the bound is tightest
                let best = rng.gen_range(0..n);
                if rng.gen_bool(0.5) {
                    let eps = rng.gen_range(-12.0..0.0f64).exp();
                    let mixed = p
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| eps * x + if i == best { 1.0 - eps } else { 0.0 })
                        .collect();
                    p = ProbabilityVector::new(mixed)?;
                }
                Ok(EntropySample {
                    p,
                    delta,
                    tau: tau.max(tau0),
                    best,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(check_entropy_lemma(&samples)?)
    })
}

pub fn stability_ratio(seed: u64, size: SuiteSize) -> Result<ViolationReport> {
    let mut report = family("stability_ratio", SLACK_TOLERANCE, seed, 5, size.sequences, |k, rng| {
        // every tenth sequence runs the full horizon
        let rounds = if k % 10 == 0 { 10_000 } else { 1000 };
        let plays = adaptive_ftrl_plays(&bernoulli_sequence(rng, rounds, 16))?;
        Ok(check_stability_ratio(&plays, 16)?)
    })?;
    report.merge(check_stability_ratio(&adaptive_ftrl_plays(&alternating(10_000))?, 2)?);
    report.merge(check_stability_ratio(
        &adaptive_ftrl_plays(&vec![vec![1.0, 0.0, 0.5]; 2000])?,
        3,
    )?);
    Ok(report)
}

pub fn observations(seed: u64, size: SuiteSize) -> Result<ViolationReport> {
    let spec = StochasticSpec::with_gap(2, 0.4)?;
    let base = trial_seed(seed, 6);
    let mut report = family("observations", SLACK_TOLERANCE, seed, 6, 50, |k, _| {
        Ok(check_observations(
            &adaptive_ftrl_trace(&spec, 50.0, base, k, 5000)?,
            spec.means(),
        )?)
    })?;
    report.merge(check_observations(
        &adaptive_ftrl_trace(&spec, 0.0, base, 0, 5000)?,
        spec.means(),
    )?);
    let random = family("observations", SLACK_TOLERANCE, seed, 7, size.traces, |_, rng| {
        let spec = random_instance(rng, 8)?;
        let budget = rng.gen_range(0.0..=200.0);
        let rounds = rng.gen_range(1..=1000);
        let trace = adaptive_ftrl_trace(&spec, budget, rng.gen(), 0, rounds)?;
        Ok(check_observations(&trace, spec.means())?)
    })?;
    report.merge(random);
    Ok(report)
}

pub fn sum_bounds(seed: u64, size: SuiteSize) -> Result<ViolationReport> {
    let spec = StochasticSpec::with_gap(2, 0.4)?;
    let base = trial_seed(seed, 8);
    let mut report = family("sum_bounds", SLACK_TOLERANCE, seed, 8, 20, |k, _| {
        Ok(check_sum_bounds(
            &adaptive_ftrl_trace(&spec, 0.0, base, k, 10_000)?,
            spec.means(),
        )?)
    })?;
    let corrupted = family("sum_bounds", SLACK_TOLERANCE, seed, 9, 20, |k, _| {
        Ok(check_sum_bounds(
            &adaptive_ftrl_trace(&spec, 100.0, trial_seed(seed, 9), k, 10_000)?,
            spec.means(),
        )?)
    })?;
    report.merge(corrupted);
    let deterministic = StochasticSpec::with_gap(4, 1.0)?;
    report.merge(check_sum_bounds(
        &adaptive_ftrl_trace(&deterministic, 0.0, base, 0, 5000)?,
        deterministic.means(),
    )?);
    let random = family("sum_bounds", SLACK_TOLERANCE, seed, 10, size.traces, |_, rng| {
        let spec = random_instance(rng, 8)?;
        let budget = rng.gen_range(0.0..=200.0);
        let rounds = rng.gen_range(1..=2000);
        let trace = adaptive_ftrl_trace(&spec, budget, rng.gen(), 0, rounds)?;
        Ok(check_sum_bounds(&trace, spec.means())?)
    })?;
    report.merge(random);
    Ok(report)
}

pub fn fixed_equivalence(seed: u64) -> Result<ViolationReport> {
    let mut report = family("fixed_equivalence", 0.0, seed, 11, 100, |_, rng| {
        let n = rng.gen_range(2..=16);
        let rounds = rng.gen_range(1..=1000);
        let eta = rng.gen_range(0.01..=2.0);
        Ok(check_fixed_equivalence(&signed_sequence(rng, rounds, n), eta)?)
    })?;
    report.merge(check_fixed_equivalence(&vec![vec![0.0; 5]; 1000], 0.3)?);
    Ok(report)
}

/// Corrupted losses of the lower-bound instance up to its horizon.
pub fn lower_bound_losses(delta: f64, budget: u64, alpha: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let (spec, mut corruption) = lower_bound_instance(delta, budget)?;
    let horizon = lower_bound_horizon(delta, budget, alpha)?;
    let mut rng = trial_rng(seed, 0);
    (1..=horizon)
        .map(|t| Ok(corruption.apply(t, spec.sample_round(&mut rng))?.corrupted.into_inner()))
        .collect()
}

pub fn adaptive_divergence(seed: u64) -> Result<ViolationReport> {
    let schedule = StepSchedule::default_adaptive(2)?;
    let StepSchedule::Adaptive(alpha) = schedule else {
        unreachable!()
    };
    let base = trial_seed(seed, 12);
    let g = lower_bound_losses(DIVERGENCE_DELTA, DIVERGENCE_BUDGET, alpha, base)?;
    let mut report = check_adaptive_divergence(&g, schedule, DIVERGENCE_THRESHOLD)?.with_seed(base);
    report.digest.seed = Some(seed);
    Ok(report)
}

/// All families in a fixed order.
pub fn run_suite(seed: u64, size: SuiteSize) -> Result<Vec<ViolationReport>> {
    Ok(vec![
        second_order_bound(seed, size)?,
        adaptive_regret_inequality(seed, size)?,
        entropy_lemma(seed, size)?,
        stability_ratio(seed, size)?,
        observations(seed, size)?,
        sum_bounds(seed, size)?,
        fixed_equivalence(seed)?,
        adaptive_divergence(seed)?,
    ])
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// One JSON object per report; non-finite numbers become `null`.
pub fn report_json(report: &ViolationReport) -> Value {
    let first = report.first_violation.as_ref().map(|v| {
        json!({
            "seed": v.seed,
            "location": v.location,
            "lhs": finite(v.lhs),
            "rhs": finite(v.rhs),
        })
    });
    json!({
        "check": report.check,
        "seed": report.digest.seed,
        "rounds": report.digest.rounds,
        "experts": report.digest.experts,
        "instances": report.instances,
        "violations": report.violations,
        "worst_slack": finite(report.worst_slack),
        "tolerance": report.tolerance,
        "first_violation": first,
        "passed": report.passed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_uniform_is_on_the_simplex() {
        let mut rng = trial_rng(1, 2);
        for n in 2..10 {
            let p = simplex_uniform(&mut rng, n).unwrap();
            assert_eq!(p.dim(), n);
        }
    }

    #[test]
    fn families_are_deterministic() {
        let a = fixed_equivalence(3).unwrap();
        let b = fixed_equivalence(3).unwrap();
        assert_eq!(a, b);
        assert!(a.passed());
        assert_eq!(a.instances, b.instances);
    }

    #[test]
    fn json_shape() {
        let mut r = ViolationReport::new("demo", 1e-9);
        r.record(2.0, 1.0, || "here".into());
        let v = report_json(&r.with_seed(5));
        assert_eq!(v["check"], "demo");
        assert_eq!(v["violations"], 1);
        assert_eq!(v["passed"], false);
        assert_eq!(v["first_violation"]["location"], "here");
        assert_eq!(v["first_violation"]["seed"], 5);
        assert_eq!(v["worst_slack"], -1.0);
        let empty = report_json(&ViolationReport::new("none", 0.0));
        assert!(empty["worst_slack"].is_null());
    }
}
