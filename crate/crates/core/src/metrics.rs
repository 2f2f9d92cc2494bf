//! Pseudo regret, realized regret and per-trial traces.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::environment::{best_and_gap, CorruptionStrategy, StochasticSpec};
use crate::error::{Error, Result};
use crate::learner::Learner;
use crate::simplex::{LossVector, ProbabilityVector};

/// `sum_i p_i (mu_i - mu_best)` for means with a unique minimum.
pub fn pseudo_regret_increment(p: &ProbabilityVector, means: &[f64]) -> Result<f64> {
    if p.dim() != means.len() {
        return Err(Error::DimensionMismatch {
            expected: means.len(),
            found: p.dim(),
        });
    }
    let (best, _) = best_and_gap(means)?;
    Ok(p.iter().zip(means).map(|(pi, mi)| pi * (mi - means[best])).sum())
}

/// `sum_t p_t . l_t - min_i sum_t l_{t,i}` on clean losses.
pub fn realized_regret(plays: &[ProbabilityVector], losses: &[LossVector]) -> Result<f64> {
    if plays.len() != losses.len() {
        return Err(Error::DimensionMismatch {
            expected: plays.len(),
            found: losses.len(),
        });
    }
    let Some(first) = losses.first() else {
        return Ok(0.0);
    };
    let mut expert_totals = alloc::vec![0.0; first.dim()];
    let mut learner_total = 0.0;
    for (p, l) in plays.iter().zip(losses) {
        if p.dim() != expert_totals.len() || l.dim() != expert_totals.len() {
            return Err(Error::DimensionMismatch {
                expected: expert_totals.len(),
                found: if p.dim() != expert_totals.len() {
                    p.dim()
                } else {
                    l.dim()
                },
            });
        }
        learner_total += p.dot(l);
        for (acc, x) in expert_totals.iter_mut().zip(l.iter()) {
            *acc += x;
        }
    }
    Ok(learner_total - min_entry(&expert_totals))
}

fn min_entry(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// One stored round of a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub play: ProbabilityVector,
    pub clean: LossVector,
    pub corrupted: LossVector,
    pub step: f64,
}

/// Which rounds keep a full [`RoundRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordPolicy {
    All,
    /// Powers of two and the final round.
    LogGrid,
    None,
}

impl RecordPolicy {
    fn keeps(self, t: u64, horizon: u64) -> bool {
        match self {
            RecordPolicy::All => true,
            RecordPolicy::LogGrid => t.is_power_of_two() || t == horizon,
            RecordPolicy::None => false,
        }
    }
}

/// Outcome of one trial. Cumulative series are indexed by `t - 1` and are
/// always exact regardless of the record policy.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTrace {
    pub records: Vec<RoundRecord>,
    pub pseudo_regret: Vec<f64>,
    pub realized_regret: Vec<f64>,
    pub corruption_spent: Vec<f64>,
    /// `p_{T+1}`, the play after the last observation.
    pub final_play: ProbabilityVector,
}

impl TrialTrace {
    pub fn rounds(&self) -> usize {
        self.pseudo_regret.len()
    }

    /// Cumulative pseudo regret after `t` rounds; 0 for `t == 0`.
    pub fn pseudo_regret_at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.pseudo_regret[t - 1]
        }
    }

    pub fn corruption_at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.corruption_spent[t - 1]
        }
    }

    pub fn total_corruption(&self) -> f64 {
        self.corruption_spent.last().copied().unwrap_or(0.0)
    }

    pub fn final_pseudo_regret(&self) -> f64 {
        self.pseudo_regret.last().copied().unwrap_or(0.0)
    }

    /// Plays `p_1..=p_{T+1}`, available when every round was recorded.
    pub fn plays(&self) -> Option<Vec<ProbabilityVector>> {
        if self.records.len() != self.rounds() {
            return None;
        }
        let mut plays: Vec<_> = self.records.iter().map(|r| r.play.clone()).collect();
        plays.push(self.final_play.clone());
        Some(plays)
    }
}

/// Runs `horizon` rounds of sample, corrupt, predict, observe.
pub fn simulate<R: RngCore + ?Sized>(
    mut learner: Learner,
    spec: &StochasticSpec,
    corruption: &mut CorruptionStrategy,
    rng: &mut R,
    horizon: u64,
    policy: RecordPolicy,
) -> Result<TrialTrace> {
    let n = spec.experts();
    if learner.experts() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: learner.experts(),
        });
    }
    let cap = horizon as usize;
    let mut trace = TrialTrace {
        records: Vec::new(),
        pseudo_regret: Vec::with_capacity(cap),
        realized_regret: Vec::with_capacity(cap),
        corruption_spent: Vec::with_capacity(cap),
        final_play: learner.predict(),
    };
    let mut pseudo = 0.0;
    let mut learner_loss = 0.0;
    let mut expert_loss = alloc::vec![0.0; n];

    for t in 1..=horizon {
        let clean = spec.sample_round(rng);
        let round = corruption.apply(t, clean)?;
        let play = learner.predict();
        let step = learner.current_step();

        pseudo += spec.pseudo_regret_increment(&play);
        learner_loss += play.dot(&round.clean);
        for (acc, x) in expert_loss.iter_mut().zip(round.clean.iter()) {
            *acc += x;
        }
        trace.pseudo_regret.push(pseudo);
        trace.realized_regret.push(learner_loss - min_entry(&expert_loss));
        trace.corruption_spent.push(corruption.spent());

        learner.observe(&round.corrupted)?;
        corruption.record_play(&play);
        if policy.keeps(t, horizon) {
            trace.records.push(RoundRecord {
                t,
                play,
                clean: round.clean,
                corrupted: round.corrupted,
                step,
            });
        }
    }
    trace.final_play = learner.predict();
    Ok(trace)
}
