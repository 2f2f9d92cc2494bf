//! Points on the probability simplex, loss vectors and step-size schedules.
//!
//! Every exponential-weights distribution in the crate is produced by
//! [`normalize_from_logits`], which shifts by the maximum logit before
//! exponentiating. Cumulative losses grow linearly with the horizon, so the
//! unshifted form overflows long before any interesting plateau is reached.

use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};

/// Absolute tolerance on `sum(p) == 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// A distribution over `N >= 2` experts.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates nonnegativity, finiteness, `N >= 2` and the sum within [`SIMPLEX_TOLERANCE`].
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::invalid("a probability vector needs at least two entries"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("probabilities must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::invalid("probabilities must sum to one"));
        }
        Ok(ProbabilityVector(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("a probability vector needs at least two entries"));
        }
        Ok(ProbabilityVector(alloc::vec![1.0 / n as f64; n]))
    }

    /// Point mass on `index`.
    pub fn vertex(n: usize, index: usize) -> Result<Self> {
        if n < 2 || index >= n {
            return Err(Error::invalid("vertex index out of range"));
        }
        let mut weights = alloc::vec![0.0; n];
        weights[index] = 1.0;
        Ok(ProbabilityVector(weights))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `p . v`
    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(p, x)| p * x).sum()
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &ProbabilityVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Deref for ProbabilityVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Loss vector with every entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn new(losses: Vec<f64>) -> Result<Self> {
        if losses.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::invalid("losses must lie in [0, 1]"));
        }
        Ok(LossVector(losses))
    }

    pub fn zeros(n: usize) -> Self {
        LossVector(alloc::vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `max_i |self_i - other_i|`
    pub fn sup_distance(&self, other: &LossVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Deref for LossVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Step-size schedule. `Adaptive(alpha)` yields `alpha / sqrt(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Fixed(f64),
    Adaptive(f64),
}

impl StepSchedule {
    pub fn fixed(eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::invalid("fixed step size must be positive and finite"));
        }
        Ok(StepSchedule::Fixed(eta))
    }

    pub fn adaptive(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid("adaptive scale must be positive and finite"));
        }
        Ok(StepSchedule::Adaptive(alpha))
    }

    /// `alpha = sqrt(ln N)`, the anytime tuning for `N` experts.
    pub fn default_adaptive(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("need at least two experts"));
        }
        Self::adaptive(libm::sqrt(libm::log(n as f64)))
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, StepSchedule::Fixed(_))
    }
}

/// Step size at round `t >= 1`.
pub fn step_size(schedule: StepSchedule, t: u64) -> Result<f64> {
    if t == 0 {
        return Err(Error::invalid("rounds are numbered from 1"));
    }
    Ok(match schedule {
        StepSchedule::Fixed(eta) => eta,
        StepSchedule::Adaptive(alpha) => alpha / libm::sqrt(t as f64),
    })
}

/// Max-shifted softmax.
pub fn normalize_from_logits(logits: &[f64]) -> Result<ProbabilityVector> {
    if logits.len() < 2 {
        return Err(Error::invalid("need at least two logits"));
    }
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(Error::invalid("logits must be finite"));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = logits.iter().map(|l| libm::exp(l - max)).collect();
    // the maximal entry contributes exp(0) = 1, so the sum is at least 1
    let sum: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w = (*w / sum).max(0.0);
    }
    Ok(ProbabilityVector(weights))
}

/// Shannon entropy in nats with `0 ln(1/0) = 0`.
pub fn entropy(p: &ProbabilityVector) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * libm::log(x))
        .sum::<f64>()
        .max(0.0)
}

/// `loss - a`, componentwise. The result may leave `[0, 1]`.
pub fn translate(loss: &[f64], a: f64) -> Vec<f64> {
    loss.iter().map(|l| l - a).collect()
}
