//! Numeric certification of regret inequalities on concrete trajectories.
//!
//! Every check evaluates both sides of an inequality on the realized plays
//! and losses and records `slack = rhs - lhs` per instance. An instance is a
//! violation when its slack drops below `-tolerance`; the default tolerance
//! only forgives floating-point representation error.

// negated comparisons below are deliberate: they treat NaN as failing
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::environment::best_and_gap;
use crate::error::{Error, Result};
use crate::learner::{generic_ftrl_entropy, generic_omd_entropy_step, trajectory, Learner, LearnerKind};
use crate::metrics::TrialTrace;
use crate::simplex::{entropy, ProbabilityVector, StepSchedule};

/// Default slack tolerance.
pub const SLACK_TOLERANCE: f64 = 1e-9;

/// Maximum coordinate deviation allowed between equivalent fixed-step trajectories.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-12;

/// What a report was computed from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InputDigest {
    pub seed: Option<u64>,
    /// Largest number of rounds among the merged inputs.
    pub rounds: usize,
    /// Largest number of experts among the merged inputs.
    pub experts: usize,
}

/// The first instance whose slack fell below the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub seed: Option<u64>,
    pub location: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    pub check: String,
    pub digest: InputDigest,
    pub tolerance: f64,
    pub instances: u64,
    /// Minimum of `rhs - lhs`; `+inf` when nothing was checked.
    pub worst_slack: f64,
    pub violations: u64,
    pub first_violation: Option<Violation>,
}

impl ViolationReport {
    pub fn new(check: impl Into<String>, tolerance: f64) -> Self {
        ViolationReport {
            check: check.into(),
            digest: InputDigest::default(),
            tolerance,
            instances: 0,
            worst_slack: f64::INFINITY,
            violations: 0,
            first_violation: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.digest.seed = Some(seed);
        if let Some(v) = self.first_violation.as_mut() {
            v.seed.get_or_insert(seed);
        }
        self
    }

    fn with_shape(mut self, rounds: usize, experts: usize) -> Self {
        self.digest.rounds = rounds;
        self.digest.experts = experts;
        self
    }

    /// Records one instance.
    pub fn record(&mut self, lhs: f64, rhs: f64, location: impl FnOnce() -> String) {
        let slack = rhs - lhs;
        self.instances += 1;
        // NaN slack counts as a violation
        if !(slack >= -self.tolerance) {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(Violation {
                    seed: self.digest.seed,
                    location: location(),
                    lhs,
                    rhs,
                });
            }
        }
        if slack < self.worst_slack || slack.is_nan() {
            self.worst_slack = slack;
        }
    }

    /// Folds `other` into `self`; counts add, the worst slack and the earliest
    /// first violation are kept.
    pub fn merge(&mut self, other: ViolationReport) {
        self.instances += other.instances;
        self.violations += other.violations;
        if other.worst_slack < self.worst_slack || other.worst_slack.is_nan() {
            self.worst_slack = other.worst_slack;
        }
        if self.first_violation.is_none() {
            self.first_violation = other.first_violation;
        }
        if self.digest.seed.is_none() {
            self.digest.seed = other.digest.seed;
        }
        self.digest.rounds = self.digest.rounds.max(other.digest.rounds);
        self.digest.experts = self.digest.experts.max(other.digest.experts);
    }
}

fn validate_signed(g: &[Vec<f64>]) -> Result<usize> {
    let n = g
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::invalid("empty loss sequence"))?;
    if n < 2 {
        return Err(Error::invalid("need at least two experts"));
    }
    for row in g {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
        if row.iter().any(|x| !(x.abs() <= 1.0)) {
            return Err(Error::invalid("losses must lie in [-1, 1]"));
        }
    }
    Ok(n)
}

fn ln(n: usize) -> f64 {
    libm::log(n as f64)
}

/// Second-order bound for fixed-step multiplicative weights:
/// `sum_t p_t . (g_t - g_{t,k}) <= ln N / eta + eta sum_t p_t . g_t^2` for every expert `k`.
pub fn check_second_order_bound(g: &[Vec<f64>], eta: f64) -> Result<ViolationReport> {
    let n = validate_signed(g)?;
    let learner = Learner::new(LearnerKind::FixedMw, StepSchedule::fixed(eta)?, n)?;
    let plays = trajectory(learner, g)?;

    let mut learner_loss = 0.0;
    let mut second = 0.0;
    let mut expert_loss = alloc::vec![0.0; n];
    for (p, row) in plays.iter().zip(g) {
        learner_loss += p.dot(row);
        second += p.iter().zip(row).map(|(pi, x)| pi * x * x).sum::<f64>();
        for (acc, x) in expert_loss.iter_mut().zip(row) {
            *acc += x;
        }
    }
    let rhs = ln(n) / eta + eta * second;
    let mut report = ViolationReport::new("second_order_bound", SLACK_TOLERANCE).with_shape(g.len(), n);
    for (k, ek) in expert_loss.iter().enumerate() {
        report.record(learner_loss - ek, rhs, || format!("comparator {k}, eta {eta}"));
    }
    Ok(report)
}

/// Both sides of the adaptive second-order bound, split into its terms.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRegretTerms {
    /// `sum_t p_t . (g_t - g_{t,k})` for each comparator `k`.
    pub regret: Vec<f64>,
    /// `4 ln N`
    pub constant: f64,
    /// `(1 / (2 ln N)) sum_t eta_t H(p_{t+1})`
    pub entropy_term: f64,
    /// `5 sum_t eta_t p_t . g_t^2`
    pub second_order_term: f64,
    /// `p_1..=p_{T+1}`
    pub plays: Vec<ProbabilityVector>,
}

impl AdaptiveRegretTerms {
    pub fn rhs(&self) -> f64 {
        self.constant + self.entropy_term + self.second_order_term
    }
}

/// Runs adaptive FTRL with `alpha = sqrt(ln N)` on `g` and evaluates both sides.
pub fn adaptive_regret_terms(g: &[Vec<f64>]) -> Result<AdaptiveRegretTerms> {
    let n = validate_signed(g)?;
    let schedule = StepSchedule::default_adaptive(n)?;
    let learner = Learner::new(LearnerKind::AdaptiveFtrl, schedule, n)?;
    let plays = trajectory(learner, g)?;
    let log_n = ln(n);

    let mut learner_loss = 0.0;
    let mut expert_loss = alloc::vec![0.0; n];
    let mut entropy_sum = 0.0;
    let mut second = 0.0;
    for (t, row) in g.iter().enumerate() {
        let p = &plays[t];
        let eta = libm::sqrt(log_n / (t + 1) as f64);
        learner_loss += p.dot(row);
        for (acc, x) in expert_loss.iter_mut().zip(row) {
            *acc += x;
        }
        entropy_sum += eta * entropy(&plays[t + 1]);
        second += eta * p.iter().zip(row).map(|(pi, x)| pi * x * x).sum::<f64>();
    }
    Ok(AdaptiveRegretTerms {
        regret: expert_loss.iter().map(|e| learner_loss - e).collect(),
        constant: 4.0 * log_n,
        entropy_term: entropy_sum / (2.0 * log_n),
        second_order_term: 5.0 * second,
        plays,
    })
}

/// Second-order bound for adaptive FTRL with `eta_t = sqrt(ln N / t)`:
/// `regret_k <= 4 ln N + (1/(2 ln N)) sum_t eta_t H(p_{t+1}) + 5 sum_t eta_t p_t . g_t^2`.
pub fn check_adaptive_regret_inequality(g: &[Vec<f64>]) -> Result<ViolationReport> {
    let terms = adaptive_regret_terms(g)?;
    let rhs = terms.rhs();
    let mut report =
        ViolationReport::new("adaptive_regret_inequality", SLACK_TOLERANCE).with_shape(g.len(), terms.regret.len());
    for (k, lhs) in terms.regret.iter().enumerate() {
        report.record(*lhs, rhs, || format!("comparator {k}"));
    }
    Ok(report)
}

/// One input to the entropy inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySample {
    pub p: ProbabilityVector,
    pub delta: f64,
    pub tau: f64,
    pub best: usize,
}

/// `64 ln(N)^2 / delta^2`, the smallest `tau` for which the entropy inequality is claimed.
pub fn entropy_lemma_tau0(delta: f64, n: usize) -> f64 {
    let log_n = ln(n);
    64.0 * log_n * log_n / (delta * delta)
}

/// Both sides of `H(p)/sqrt(tau) <= (5/8) sum_{i != best} p_i delta + (2/sqrt(tau)) exp(-delta sqrt(tau) / 8)`.
pub fn entropy_lemma_sides(sample: &EntropySample) -> Result<(f64, f64)> {
    let EntropySample { p, delta, tau, best } = sample;
    if !(*delta > 0.0 && *delta <= 1.0) {
        return Err(Error::Precondition(format!("gap {delta} outside (0, 1]")));
    }
    if *best >= p.dim() {
        return Err(Error::invalid("best expert index out of range"));
    }
    let tau0 = entropy_lemma_tau0(*delta, p.dim());
    if !(*tau >= tau0) {
        return Err(Error::Precondition(format!("tau {tau} below tau0 {tau0}")));
    }
    let root = libm::sqrt(*tau);
    let lhs = entropy(p) / root;
    let off_best: f64 = p.iter().enumerate().filter(|(i, _)| i != best).map(|(_, x)| x).sum();
    let rhs = 0.625 * off_best * delta + 2.0 / root * libm::exp(-delta * root / 8.0);
    Ok((lhs, rhs))
}

pub fn check_entropy_lemma(samples: &[EntropySample]) -> Result<ViolationReport> {
    let mut report = ViolationReport::new("entropy_lemma", SLACK_TOLERANCE);
    for (k, s) in samples.iter().enumerate() {
        let (lhs, rhs) = entropy_lemma_sides(s)?;
        report.record(lhs, rhs, || {
            format!("sample {k}: n {}, delta {}, tau {}", s.p.dim(), s.delta, s.tau)
        });
        report.digest.experts = report.digest.experts.max(s.p.dim());
    }
    report.digest.rounds = samples.len();
    Ok(report)
}

/// `p_{t+1,i} <= 9 p_{t,i}` for all `i` and every round `t >= 4 ln N`.
///
/// `plays` holds `p_1, p_2, ...` of adaptive FTRL with `alpha = sqrt(ln N)`
/// run on losses in `[0, 1]`.
pub fn check_stability_ratio(plays: &[ProbabilityVector], n: usize) -> Result<ViolationReport> {
    if n < 2 {
        return Err(Error::invalid("need at least two experts"));
    }
    if let Some(bad) = plays.iter().find(|p| p.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.dim(),
        });
    }
    let first = libm::ceil(4.0 * ln(n)).max(1.0) as usize;
    let mut report = ViolationReport::new("stability_ratio", SLACK_TOLERANCE).with_shape(plays.len(), n);
    for t in first..plays.len() {
        // plays[t - 1] is p_t
        let (now, next) = (&plays[t - 1], &plays[t]);
        for i in 0..n {
            report.record(next[i], 9.0 * now[i], || format!("round {t}, expert {i}"));
        }
    }
    Ok(report)
}

fn full_records(trace: &TrialTrace) -> Result<()> {
    if trace.records.len() != trace.rounds() {
        return Err(Error::Precondition("trace must record every round".into()));
    }
    Ok(())
}

/// Relative losses against the best expert and the realized corruption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationSides {
    /// `sum_t sum_i p_{t,i} (l_{t,i} - l_{t,best})`
    pub clean_relative: f64,
    /// `sum_t sum_i p_{t,i} (lc_{t,i} - lc_{t,best})` on corrupted losses.
    pub corrupted_relative: f64,
    /// `sum_t ||lc_t - l_t||_inf`
    pub corruption: f64,
}

pub fn observation_sides(trace: &TrialTrace, means: &[f64]) -> Result<ObservationSides> {
    full_records(trace)?;
    let (best, _) = best_and_gap(means)?;
    let mut sides = ObservationSides {
        clean_relative: 0.0,
        corrupted_relative: 0.0,
        corruption: 0.0,
    };
    for r in &trace.records {
        let p = &r.play;
        sides.clean_relative += p
            .iter()
            .zip(r.clean.iter())
            .map(|(pi, l)| pi * (l - r.clean[best]))
            .sum::<f64>();
        sides.corrupted_relative += p
            .iter()
            .zip(r.corrupted.iter())
            .map(|(pi, l)| pi * (l - r.corrupted[best]))
            .sum::<f64>();
        sides.corruption += r.clean.sup_distance(&r.corrupted);
    }
    Ok(sides)
}

/// Both elementary observations on a corrupted-stochastic trace:
/// `(lc_{t,i} - lc_{t,best})^2 <= (mu_i - mu_best) / delta` for every round and expert, and
/// clean relative loss `<=` corrupted relative loss `+ 2C`.
pub fn check_observations(trace: &TrialTrace, means: &[f64]) -> Result<ViolationReport> {
    full_records(trace)?;
    let (best, gap) = best_and_gap(means)?;
    let mut report = ViolationReport::new("observations", SLACK_TOLERANCE).with_shape(trace.rounds(), means.len());
    for r in &trace.records {
        if r.corrupted.dim() != means.len() {
            return Err(Error::DimensionMismatch {
                expected: means.len(),
                found: r.corrupted.dim(),
            });
        }
        for (i, mi) in means.iter().enumerate() {
            let d = r.corrupted[i] - r.corrupted[best];
            report.record(d * d, (mi - means[best]) / gap, || {
                format!("squared gap, round {}, expert {i}", r.t)
            });
        }
    }
    let sides = observation_sides(trace, means)?;
    report.record(
        sides.clean_relative,
        sides.corrupted_relative + 2.0 * sides.corruption,
        || "clean versus corrupted relative loss".into(),
    );
    Ok(report)
}

/// Left-hand sides of the two pathwise sum bounds for adaptive FTRL.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumBoundSides {
    /// `sum_t eta_t sum_i p_{t,i} (lc_{t,i} - lc_{t,best})^2`
    pub second_moment: f64,
    /// `16 ln N / delta + R/8`
    pub second_moment_bound: f64,
    /// `(1 / ln N) sum_t eta_t H(p_{t+1})`
    pub entropy: f64,
    /// `50 ln N / delta + 5R/8`
    pub entropy_bound: f64,
}

pub fn sum_bound_sides(trace: &TrialTrace, means: &[f64]) -> Result<SumBoundSides> {
    full_records(trace)?;
    let (best, gap) = best_and_gap(means)?;
    let n = means.len();
    let log_n = ln(n);
    let mut second = 0.0;
    let mut ent = 0.0;
    for (k, r) in trace.records.iter().enumerate() {
        let expected = libm::sqrt(log_n / r.t as f64);
        if (r.step - expected).abs() > 1e-12 * expected.max(1.0) {
            return Err(Error::Precondition(format!(
                "round {} used step {}, expected sqrt(ln N / t) = {expected}",
                r.t, r.step
            )));
        }
        second += r.step
            * r.play
                .iter()
                .zip(r.corrupted.iter())
                .map(|(pi, l)| {
                    let d = l - r.corrupted[best];
                    pi * d * d
                })
                .sum::<f64>();
        let next = trace.records.get(k + 1).map(|x| &x.play).unwrap_or(&trace.final_play);
        ent += r.step * entropy(next);
    }
    let regret = trace.final_pseudo_regret();
    Ok(SumBoundSides {
        second_moment: second,
        second_moment_bound: 16.0 * log_n / gap + regret / 8.0,
        entropy: ent / log_n,
        entropy_bound: 50.0 * log_n / gap + 0.625 * regret,
    })
}

/// The second-moment and entropy sum bounds, evaluated on the realized trajectory.
pub fn check_sum_bounds(trace: &TrialTrace, means: &[f64]) -> Result<ViolationReport> {
    let sides = sum_bound_sides(trace, means)?;
    let mut report = ViolationReport::new("sum_bounds", SLACK_TOLERANCE).with_shape(trace.rounds(), means.len());
    report.record(sides.second_moment, sides.second_moment_bound, || {
        "second-moment sum".into()
    });
    report.record(sides.entropy, sides.entropy_bound, || "entropy sum".into());
    Ok(report)
}

/// Fixed-step FTRL and OMD with the entropy regularizer produce the same plays.
///
/// Compares the closed-form FTRL engine, the OMD recursion and the
/// [`LearnerKind::FixedMw`] learner round by round; `slack` is
/// [`EQUIVALENCE_TOLERANCE`] minus the deviation, with zero tolerance.
pub fn check_fixed_equivalence(g: &[Vec<f64>], eta: f64) -> Result<ViolationReport> {
    let n = validate_signed(g)?;
    let mut learner = Learner::new(LearnerKind::FixedMw, StepSchedule::fixed(eta)?, n)?;
    let mut cumulative = alloc::vec![0.0; n];
    let mut omd = ProbabilityVector::uniform(n)?;
    let mut report = ViolationReport::new("fixed_equivalence", 0.0).with_shape(g.len(), n);
    for t in 0..=g.len() {
        let ftrl = generic_ftrl_entropy(&cumulative, eta)?;
        let dev = ftrl.max_abs_diff(&omd).max(ftrl.max_abs_diff(&learner.predict()));
        report.record(dev, EQUIVALENCE_TOLERANCE, || format!("round {}", t + 1));
        if let Some(row) = g.get(t) {
            omd = generic_omd_entropy_step(&omd, row, eta)?;
            learner.observe_signed(row)?;
            for (c, x) in cumulative.iter_mut().zip(row) {
                *c += x;
            }
        }
    }
    Ok(report)
}

/// Largest coordinate gap between adaptive FTRL and adaptive OMD plays over
/// `p_1..=p_{T+1}`, and the 1-based round where it occurs.
pub fn trajectory_divergence(g: &[Vec<f64>], schedule: StepSchedule) -> Result<(f64, u64)> {
    let n = validate_signed(g)?;
    let ftrl = trajectory(Learner::new(LearnerKind::AdaptiveFtrl, schedule, n)?, g)?;
    let omd = trajectory(Learner::new(LearnerKind::AdaptiveOmd, schedule, n)?, g)?;
    let mut worst = (0.0, 1);
    for (t, (a, b)) in ftrl.iter().zip(&omd).enumerate() {
        let d = a.max_abs_diff(b);
        if d > worst.0 {
            worst = (d, t as u64 + 1);
        }
    }
    Ok(worst)
}

/// The inverted equivalence check: with a decreasing schedule the two
/// variants must separate by at least `min_divergence` somewhere.
pub fn check_adaptive_divergence(
    g: &[Vec<f64>],
    schedule: StepSchedule,
    min_divergence: f64,
) -> Result<ViolationReport> {
    let (dev, round) = trajectory_divergence(g, schedule)?;
    let mut report = ViolationReport::new("adaptive_divergence", 0.0).with_shape(g.len(), g[0].len());
    report.record(min_divergence, dev, || format!("max deviation {dev} at round {round}"));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn second_order_zero_losses() {
        let g = vec![vec![0.0; 3]; 50];
        let r = check_second_order_bound(&g, 0.3).unwrap();
        assert!(r.passed());
        assert_eq!(r.instances, 3);
        assert!((r.worst_slack - libm::log(3.0) / 0.3).abs() < 1e-12);
    }

    #[test]
    fn second_order_alternating() {
        let g: Vec<Vec<f64>> = (0..10_000)
            .map(|t| if t % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
            .collect();
        let r = check_second_order_bound(&g, 0.5).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn second_order_rejects_out_of_range() {
        assert!(check_second_order_bound(&[vec![0.0, 1.5]], 0.1).is_err());
        assert!(check_second_order_bound(&[], 0.1).is_err());
        assert!(check_second_order_bound(&[vec![0.0, 0.5], vec![0.0]], 0.1).is_err());
    }

    #[test]
    fn adaptive_zero_losses() {
        let g = vec![vec![0.0; 4]; 20];
        let terms = adaptive_regret_terms(&g).unwrap();
        assert!(terms.regret.iter().all(|r| *r == 0.0));
        assert!(terms.rhs() >= 4.0 * libm::log(4.0));
        assert!(check_adaptive_regret_inequality(&g).unwrap().passed());
    }

    #[test]
    fn adaptive_translation_invariance() {
        let g: Vec<Vec<f64>> = (0..300)
            .map(|t| vec![((t * 7) % 11) as f64 / 10.0 % 1.0, ((t * 3) % 5) as f64 / 4.0, 0.5])
            .collect();
        let star = 1;
        let shifted: Vec<Vec<f64>> = g.iter().map(|row| crate::simplex::translate(row, row[star])).collect();
        let a = adaptive_regret_terms(&g).unwrap();
        let b = adaptive_regret_terms(&shifted).unwrap();
        assert!((a.regret[star] - b.regret[star]).abs() < 1e-10);
        for (p, q) in a.plays.iter().zip(&b.plays) {
            assert!(p.max_abs_diff(q) < 1e-12);
        }
    }

    #[test]
    fn entropy_lemma_examples() {
        let vertex = EntropySample {
            p: ProbabilityVector::vertex(3, 1).unwrap(),
            delta: 0.3,
            tau: entropy_lemma_tau0(0.3, 3),
            best: 1,
        };
        let (lhs, rhs) = entropy_lemma_sides(&vertex).unwrap();
        assert_eq!(lhs, 0.0);
        assert!(rhs > 0.0);

        let tau0 = entropy_lemma_tau0(0.5, 2);
        assert!((tau0 - 122.995_971_563_059_56).abs() < 1e-9);
        let uniform = EntropySample {
            p: ProbabilityVector::uniform(2).unwrap(),
            delta: 0.5,
            tau: tau0,
            best: 0,
        };
        let (lhs, rhs) = entropy_lemma_sides(&uniform).unwrap();
        assert!((lhs - 0.0625).abs() < 1e-12);
        assert!((rhs - 0.246_418_440_055_560_2).abs() < 1e-12);
        assert!(check_entropy_lemma(&[vertex, uniform]).unwrap().passed());
    }

    #[test]
    fn entropy_lemma_scope() {
        let below = EntropySample {
            p: ProbabilityVector::uniform(2).unwrap(),
            delta: 0.5,
            tau: 100.0,
            best: 0,
        };
        assert!(matches!(check_entropy_lemma(&[below]), Err(Error::Precondition(_))));
        let wide = EntropySample {
            p: ProbabilityVector::uniform(2).unwrap(),
            delta: 1.5,
            tau: 1e6,
            best: 0,
        };
        assert!(matches!(entropy_lemma_sides(&wide), Err(Error::Precondition(_))));
    }

    #[test]
    fn stability_constant_losses() {
        let g = vec![vec![0.3, 0.9, 0.0, 1.0]; 200];
        let schedule = StepSchedule::default_adaptive(4).unwrap();
        let plays = trajectory(Learner::new(LearnerKind::AdaptiveFtrl, schedule, 4).unwrap(), &g).unwrap();
        let r = check_stability_ratio(&plays, 4).unwrap();
        assert!(r.passed());
        // rounds ceil(4 ln 4) = 6 ..= 200, four experts each
        assert_eq!(r.instances, 4 * (201 - 6));
    }

    #[test]
    fn stability_alternating_two_experts() {
        let g: Vec<Vec<f64>> = (0..5000)
            .map(|t| if t % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
            .collect();
        let schedule = StepSchedule::default_adaptive(2).unwrap();
        let plays = trajectory(Learner::new(LearnerKind::AdaptiveFtrl, schedule, 2).unwrap(), &g).unwrap();
        assert!(check_stability_ratio(&plays, 2).unwrap().passed());
    }

    #[test]
    fn stability_flags_a_jump() {
        let plays = vec![
            ProbabilityVector::new(vec![0.99, 0.01]).unwrap(),
            ProbabilityVector::new(vec![0.5, 0.5]).unwrap(),
            ProbabilityVector::new(vec![0.99, 0.01]).unwrap(),
            ProbabilityVector::new(vec![0.5, 0.5]).unwrap(),
        ];
        let r = check_stability_ratio(&plays, 2).unwrap();
        assert_eq!(r.violations, 1);
        assert!(r.first_violation.unwrap().location.contains("round 3"));
    }

    #[test]
    fn fixed_equivalence_zero_losses() {
        let g = vec![vec![0.0; 5]; 40];
        let r = check_fixed_equivalence(&g, 0.8).unwrap();
        assert!(r.passed());
        assert_eq!(r.worst_slack, EQUIVALENCE_TOLERANCE);
    }

    #[test]
    fn adaptive_schedules_diverge_under_front_loaded_corruption() {
        let g = vec![vec![1.0, 0.0]; 70];
        let schedule = StepSchedule::default_adaptive(2).unwrap();
        let (dev, _) = trajectory_divergence(&g, schedule).unwrap();
        assert!(dev > 0.05);
        assert!(check_adaptive_divergence(&g, schedule, 0.05).unwrap().passed());
        assert!(!check_adaptive_divergence(&g, schedule, 0.5).unwrap().passed());
        // with a fixed schedule the variants coincide
        let (same, _) = trajectory_divergence(&g, StepSchedule::Fixed(0.4)).unwrap();
        assert!(same < 1e-12);
    }

    #[test]
    fn report_merge_and_nan() {
        let mut a = ViolationReport::new("x", SLACK_TOLERANCE);
        a.record(1.0, 2.0, || "a".into());
        let mut b = ViolationReport::new("x", SLACK_TOLERANCE).with_seed(7);
        b.record(2.0, 1.0, || "b".into());
        b.record(f64::NAN, 1.0, || "c".into());
        a.merge(b);
        assert_eq!(a.instances, 3);
        assert_eq!(a.violations, 2);
        assert_eq!(a.first_violation.as_ref().unwrap().location, "b");
        assert_eq!(a.first_violation.as_ref().unwrap().seed, Some(7));
        assert!(a.worst_slack.is_nan());
    }

    #[test]
    fn tolerance_absorbs_rounding_only() {
        let mut r = ViolationReport::new("x", SLACK_TOLERANCE);
        r.record(1.0 + 5e-10, 1.0, String::new);
        assert!(r.passed());
        r.record(1.0 + 2e-9, 1.0, String::new);
        assert!(!r.passed());
    }
}
