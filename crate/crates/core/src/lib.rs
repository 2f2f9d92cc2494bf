//! Prediction with expert advice under adversarially corrupted stochastic losses.
//!
//! The crate is `no_std` and only needs `alloc`. It provides the simplex
//! primitives, three multiplicative weights learners (fixed step, adaptive
//! FTRL, adaptive OMD), Bernoulli environments with corruption strategies,
//! regret accounting over a full protocol run, and checks that evaluate both
//! sides of the regret inequalities on concrete trajectories.

#![no_std]

extern crate alloc;

pub mod environment;
pub mod error;
pub mod learner;
pub mod metrics;
pub mod simplex;
pub mod verify;

pub use environment::{
    corruption_total, lower_bound_horizon, lower_bound_instance, AdversaryRule, AdversaryView, CorruptionKind,
    CorruptionStrategy, LossRound, StochasticSpec,
};
pub use error::{Error, Result};
pub use learner::{generic_ftrl_entropy, generic_omd_entropy_step, trajectory, Learner, LearnerKind};
pub use metrics::{pseudo_regret_increment, realized_regret, simulate, RecordPolicy, RoundRecord, TrialTrace};
pub use simplex::{entropy, normalize_from_logits, step_size, translate, LossVector, ProbabilityVector, StepSchedule};
pub use verify::ViolationReport;
