//! Stochastic losses and the adversaries that corrupt what the learner sees.
//!
//! Each round runs: draw a clean loss vector, let the adversary replace it
//! with a corrupted one, then let the learner play and observe only the
//! corrupted vector. The corruption spent on a round is the sup-norm distance
//! between the two vectors; the corruption level of a run is the sum.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::simplex::{LossVector, ProbabilityVector};

/// Independent Bernoulli losses with a unique best expert.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticSpec {
    means: Vec<f64>,
    best: usize,
    gap: f64,
}

impl StochasticSpec {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::invalid("need at least two experts"));
        }
        if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::invalid("means must lie in [0, 1]"));
        }
        let (best, gap) = best_and_gap(&means)?;
        Ok(StochasticSpec { means, best, gap })
    }

    /// Best expert at mean `(1 - delta) / 2`, every other at `(1 + delta) / 2`.
    pub fn with_gap(n: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::invalid("gap must lie in (0, 1]"));
        }
        let mut means = alloc::vec![0.5 * (1.0 + delta); n];
        if let Some(first) = means.first_mut() {
            *first = 0.5 * (1.0 - delta);
        }
        // keep the declared gap rather than the rounded difference of the means
        let mut spec = Self::new(means)?;
        spec.gap = delta;
        Ok(spec)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn experts(&self) -> usize {
        self.means.len()
    }

    /// Index of the expert with the smallest mean.
    pub fn best(&self) -> usize {
        self.best
    }

    /// `min_{i != best} (mu_i - mu_best)`
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Draws one clean loss vector.
    pub fn sample_round<R: RngCore + ?Sized>(&self, rng: &mut R) -> LossVector {
        let losses = self
            .means
            .iter()
            .map(|&m| if unit_f64(rng) < m { 1.0 } else { 0.0 })
            .collect();
        LossVector::new(losses).expect("bernoulli draws are 0 or 1")
    }

    /// `sum_i p_i (mu_i - mu_best)`
    pub fn pseudo_regret_increment(&self, p: &ProbabilityVector) -> f64 {
        let best = self.means[self.best];
        p.iter().zip(&self.means).map(|(pi, mi)| pi * (mi - best)).sum()
    }
}

/// Unique argmin and gap of `means`.
pub(crate) fn best_and_gap(means: &[f64]) -> Result<(usize, f64)> {
    if means.len() < 2 {
        return Err(Error::invalid("need at least two experts"));
    }
    if means.iter().any(|m| !m.is_finite()) {
        return Err(Error::invalid("means must be finite"));
    }
    let mut best = 0;
    for (i, m) in means.iter().enumerate() {
        if *m < means[best] {
            best = i;
        }
    }
    let gap = means
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, m)| m - means[best])
        .fold(f64::INFINITY, f64::min);
    if gap <= 0.0 {
        return Err(Error::invalid("best expert must be unique"));
    }
    Ok((best, gap))
}

/// Uniform in `[0, 1)` from the top 53 bits.
fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One protocol round: what happened and what the learner saw.
#[derive(Debug, Clone, PartialEq)]
pub struct LossRound {
    pub clean: LossVector,
    pub corrupted: LossVector,
    /// `||corrupted - clean||_inf`
    pub spend: f64,
}

impl LossRound {
    pub fn new(clean: LossVector, corrupted: LossVector) -> Result<Self> {
        if clean.dim() != corrupted.dim() {
            return Err(Error::DimensionMismatch {
                expected: clean.dim(),
                found: corrupted.dim(),
            });
        }
        let spend = clean.sup_distance(&corrupted);
        Ok(LossRound {
            clean,
            corrupted,
            spend,
        })
    }

    pub fn uncorrupted(clean: LossVector) -> Self {
        LossRound {
            corrupted: clean.clone(),
            clean,
            spend: 0.0,
        }
    }
}

/// Everything an adaptive adversary may look at when corrupting round `round`.
#[derive(Debug, Clone, Copy)]
pub struct AdversaryView<'a> {
    pub round: u64,
    pub clean: &'a LossVector,
    /// Rounds `1..round`.
    pub history: &'a [LossRound],
    /// Learner plays `p_1..p_{round-1}`; the current play is not yet chosen.
    pub past_plays: &'a [ProbabilityVector],
}

/// A user-supplied corruption rule.
pub trait AdversaryRule {
    fn corrupt(&mut self, view: AdversaryView<'_>) -> Vec<f64>;
}

impl<F> AdversaryRule for F
where
    F: FnMut(AdversaryView<'_>) -> Vec<f64>,
{
    fn corrupt(&mut self, view: AdversaryView<'_>) -> Vec<f64> {
        self(view)
    }
}

pub enum CorruptionKind {
    None,
    /// Rounds `t <= budget` show loss 1 on `target` and 0 elsewhere.
    FrontLoad {
        budget: f64,
        target: usize,
    },
    Custom {
        rule: Box<dyn AdversaryRule>,
        budget: Option<f64>,
    },
}

impl fmt::Debug for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorruptionKind::None => f.write_str("None"),
            CorruptionKind::FrontLoad { budget, target } => f
                .debug_struct("FrontLoad")
                .field("budget", budget)
                .field("target", target)
                .finish(),
            CorruptionKind::Custom { budget, .. } => {
                f.debug_struct("Custom").field("budget", budget).finish_non_exhaustive()
            }
        }
    }
}

/// A corruption strategy together with its running spend.
#[derive(Debug)]
pub struct CorruptionStrategy {
    kind: CorruptionKind,
    spent: f64,
    history: Vec<LossRound>,
    plays: Vec<ProbabilityVector>,
}

impl CorruptionStrategy {
    pub fn none() -> Self {
        Self::from_kind(CorruptionKind::None)
    }

    /// Front-loaded corruption against `target`, normally the best expert.
    pub fn front_load(budget: f64, target: usize) -> Result<Self> {
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(Error::invalid("corruption budget must be finite and nonnegative"));
        }
        Ok(Self::from_kind(CorruptionKind::FrontLoad { budget, target }))
    }

    pub fn custom(rule: impl AdversaryRule + 'static, budget: Option<f64>) -> Result<Self> {
        if let Some(b) = budget {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::invalid("corruption budget must be finite and nonnegative"));
            }
        }
        Ok(Self::from_kind(CorruptionKind::Custom {
            rule: Box::new(rule),
            budget,
        }))
    }

    fn from_kind(kind: CorruptionKind) -> Self {
        CorruptionStrategy {
            kind,
            spent: 0.0,
            history: Vec::new(),
            plays: Vec::new(),
        }
    }

    pub fn kind(&self) -> &CorruptionKind {
        &self.kind
    }

    /// Total spend over the rounds emitted so far.
    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn budget(&self) -> Option<f64> {
        match &self.kind {
            CorruptionKind::None => Some(0.0),
            CorruptionKind::FrontLoad { budget, .. } => Some(*budget),
            CorruptionKind::Custom { budget, .. } => *budget,
        }
    }

    /// Lets an adaptive adversary see the learner's play once it is made.
    pub fn record_play(&mut self, p: &ProbabilityVector) {
        if matches!(self.kind, CorruptionKind::Custom { .. }) {
            self.plays.push(p.clone());
        }
    }

    /// Corrupts round `t` (1-based) given its clean loss.
    pub fn apply(&mut self, t: u64, clean: LossVector) -> Result<LossRound> {
        let round = match &mut self.kind {
            CorruptionKind::None => LossRound::uncorrupted(clean),
            CorruptionKind::FrontLoad { budget, target } => {
                if (t as f64) <= *budget {
                    if *target >= clean.dim() {
                        return Err(Error::invalid("front-load target out of range"));
                    }
                    let mut shown = alloc::vec![0.0; clean.dim()];
                    shown[*target] = 1.0;
                    LossRound::new(clean, LossVector::new(shown)?)?
                } else {
                    LossRound::uncorrupted(clean)
                }
            }
            CorruptionKind::Custom { rule, budget } => {
                let view = AdversaryView {
                    round: t,
                    clean: &clean,
                    history: &self.history,
                    past_plays: &self.plays,
                };
                let raw = rule.corrupt(view);
                if raw.len() != clean.dim() {
                    return Err(Error::AdversaryFault(format!(
                        "rule returned {} entries for {} experts",
                        raw.len(),
                        clean.dim()
                    )));
                }
                if raw.iter().any(|x| !x.is_finite()) {
                    return Err(Error::AdversaryFault(format!("non-finite loss at round {t}")));
                }
                let shown = raw.into_iter().map(|x| x.clamp(0.0, 1.0)).collect();
                let round = LossRound::new(clean, LossVector::new(shown)?)?;
                if let Some(b) = budget {
                    if self.spent + round.spend > *b + 1e-9 {
                        return Err(Error::AdversaryFault(format!(
                            "round {t} exceeds the corruption budget {b}"
                        )));
                    }
                }
                self.history.push(round.clone());
                round
            }
        };
        self.spent += round.spend;
        Ok(round)
    }
}

/// Two-expert instance on which the OMD variant pays for early corruption.
///
/// Means are `((1 - delta) / 2, (1 + delta) / 2)`; for the first `c` rounds the
/// adversary shows loss 1 on expert 0 (the best one) and 0 on expert 1.
pub fn lower_bound_instance(delta: f64, c: u64) -> Result<(StochasticSpec, CorruptionStrategy)> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid("gap must lie in (0, 1]"));
    }
    if c == 0 {
        return Err(Error::invalid("corruption level must be a positive integer"));
    }
    let spec = StochasticSpec::with_gap(2, delta)?;
    let strategy = CorruptionStrategy::front_load(c as f64, 0)?;
    Ok((spec, strategy))
}

/// Horizon `min(C / (64 delta^2), exp(sqrt(C) / (4 alpha)))` up to which OMD
/// with `eta_t = alpha / sqrt(t)` keeps playing the wrong expert on the
/// lower-bound instance, rounded up to a whole round.
pub fn lower_bound_horizon(delta: f64, c: u64, alpha: f64) -> Result<u64> {
    if !(delta > 0.0 && delta <= 1.0) || !(alpha > 0.0 && alpha.is_finite()) || c == 0 {
        return Err(Error::invalid("need delta in (0, 1], alpha > 0 and c >= 1"));
    }
    let c = c as f64;
    let by_gap = c / (64.0 * delta * delta);
    let by_scale = libm::exp(0.25 * libm::sqrt(c) / alpha);
    Ok(libm::ceil(by_gap.min(by_scale)) as u64)
}

/// `sum_t ||corrupted_t - clean_t||_inf`
pub fn corruption_total(rounds: &[LossRound]) -> f64 {
    rounds.iter().map(|r| r.spend).sum()
}
