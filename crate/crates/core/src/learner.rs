//! Multiplicative weights learners.
//!
//! Three variants share one predict/observe loop:
//!
//! * [`LearnerKind::FixedMw`]: `p_t ∝ exp(-eta * G_t)` with constant `eta`.
//! * [`LearnerKind::AdaptiveFtrl`]: `p_t ∝ exp(-eta_t * G_t)`, the FTRL
//!   instantiation with regularizer `eta_t^{-1} * negentropy`.
//! * [`LearnerKind::AdaptiveOmd`]: `p_t ∝ exp(-sum_{s<t} eta_s * g_s)`, the
//!   mirror-descent instantiation with the same regularizers.
//!
//! `G_t = sum_{s<t} g_s` is the raw cumulative loss. With a fixed step size
//! the two adaptive forms coincide with `FixedMw`; once the step size
//! decreases they do not, and the OMD form is the one that cannot forget a
//! burst of early corruption.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::simplex::{normalize_from_logits, step_size, LossVector, ProbabilityVector, StepSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LearnerKind {
    FixedMw,
    AdaptiveFtrl,
    AdaptiveOmd,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 3] = [
        LearnerKind::FixedMw,
        LearnerKind::AdaptiveFtrl,
        LearnerKind::AdaptiveOmd,
    ];

    /// Stable lower_snake_case name used in configs and CSV output.
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::FixedMw => "fixed_mw",
            LearnerKind::AdaptiveFtrl => "adaptive_ftrl",
            LearnerKind::AdaptiveOmd => "adaptive_omd",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// State of a multiplicative weights learner.
///
/// `FixedMw` and `AdaptiveFtrl` keep the raw cumulative loss, `AdaptiveOmd`
/// keeps the step-weighted cumulative loss. Both are stored in `cumulative`.
#[derive(Debug, Clone, PartialEq)]
pub struct Learner {
    kind: LearnerKind,
    schedule: StepSchedule,
    round: u64,
    cumulative: Vec<f64>,
}

impl Learner {
    /// `FixedMw` requires a fixed schedule. The adaptive kinds accept either;
    /// with a fixed schedule they reduce to `FixedMw`.
    pub fn new(kind: LearnerKind, schedule: StepSchedule, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("need at least two experts"));
        }
        if kind == LearnerKind::FixedMw && !schedule.is_fixed() {
            return Err(Error::invalid("fixed_mw needs a fixed step size"));
        }
        Ok(Learner {
            kind,
            schedule,
            round: 1,
            cumulative: alloc::vec![0.0; n],
        })
    }

    pub fn kind(&self) -> LearnerKind {
        self.kind
    }

    pub fn schedule(&self) -> StepSchedule {
        self.schedule
    }

    pub fn experts(&self) -> usize {
        self.cumulative.len()
    }

    /// Current round `t`; equals one plus the number of observed losses.
    pub fn round(&self) -> u64 {
        self.round
    }

    /// Step size at the current round.
    pub fn current_step(&self) -> f64 {
        step_size(self.schedule, self.round).expect("round is at least one")
    }

    /// Raw cumulative loss for `FixedMw`/`AdaptiveFtrl`, step-weighted for `AdaptiveOmd`.
    pub fn statistic(&self) -> &[f64] {
        &self.cumulative
    }

    /// Distribution `p_t` for the current round.
    pub fn predict(&self) -> ProbabilityVector {
        let scale = match self.kind {
            LearnerKind::FixedMw | LearnerKind::AdaptiveFtrl => self.current_step(),
            LearnerKind::AdaptiveOmd => 1.0,
        };
        let logits: Vec<f64> = self.cumulative.iter().map(|c| -scale * c).collect();
        normalize_from_logits(&logits).expect("cumulative statistic stays finite")
    }

    /// Feed the loss observed at the current round and advance to the next.
    pub fn observe(&mut self, g: &LossVector) -> Result<()> {
        self.observe_signed(g)
    }

    /// Like [`observe`](Self::observe) but accepts any finite vector, e.g.
    /// translated or signed losses in `[-1, 1]`.
    pub fn observe_signed(&mut self, g: &[f64]) -> Result<()> {
        if g.len() != self.cumulative.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cumulative.len(),
                found: g.len(),
            });
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("losses must be finite"));
        }
        let weight = match self.kind {
            LearnerKind::FixedMw | LearnerKind::AdaptiveFtrl => 1.0,
            // loss g_t is weighted by eta_t at its own round
            LearnerKind::AdaptiveOmd => self.current_step(),
        };
        for (c, x) in self.cumulative.iter_mut().zip(g) {
            *c += weight * x;
        }
        self.round += 1;
        Ok(())
    }
}

/// Plays `p_1..=p_{T+1}` of `learner` on `losses` (signed losses allowed).
pub fn trajectory(mut learner: Learner, losses: &[Vec<f64>]) -> Result<Vec<ProbabilityVector>> {
    let mut plays = Vec::with_capacity(losses.len() + 1);
    for g in losses {
        plays.push(learner.predict());
        learner.observe_signed(g)?;
    }
    plays.push(learner.predict());
    Ok(plays)
}

/// FTRL with regularizer `eta^{-1} * sum_i w_i ln w_i` over the simplex.
///
/// The minimizer of `w . G + eta^{-1} sum_i w_i ln w_i` satisfies
/// `ln w_i = -eta G_i - 1 - lambda` at the Lagrange multiplier `lambda` of
/// the sum constraint, so `w_i = exp(-eta G_i) / Z`.
pub fn generic_ftrl_entropy(cumulative: &[f64], eta: f64) -> Result<ProbabilityVector> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid("step size must be positive and finite"));
    }
    let logits: Vec<f64> = cumulative.iter().map(|g| -eta * g).collect();
    normalize_from_logits(&logits)
}

/// One OMD step with regularizer `eta^{-1} * negentropy`.
///
/// The unconstrained mirror step is `w'_i = p_i exp(-eta g_i)`; the
/// KL projection back onto the simplex is renormalization.
pub fn generic_omd_entropy_step(p: &ProbabilityVector, g: &[f64], eta: f64) -> Result<ProbabilityVector> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid("step size must be positive and finite"));
    }
    if g.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: g.len(),
        });
    }
    if p.iter().any(|&x| x <= 0.0) {
        return Err(Error::invalid("mirror step needs a strictly positive point"));
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("losses must be finite"));
    }
    // work in log space so the projection inherits the max-shift
    let logits: Vec<f64> = p.iter().zip(g).map(|(pi, gi)| libm::log(*pi) - eta * gi).collect();
    normalize_from_logits(&logits)
}
