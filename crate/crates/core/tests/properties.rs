use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust_hedge_core::verify::{
    check_adaptive_regret_inequality, check_entropy_lemma, check_fixed_equivalence, check_observations,
    check_second_order_bound, check_stability_ratio, check_sum_bounds, entropy_lemma_tau0, EntropySample,
};
use robust_hedge_core::{
    entropy, normalize_from_logits, pseudo_regret_increment, simulate, step_size, trajectory, translate,
    CorruptionStrategy, Learner, LearnerKind, ProbabilityVector, RecordPolicy, StepSchedule, StochasticSpec,
};

fn signed_losses(max_n: usize, max_t: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max_n, 1..=max_t).prop_flat_map(|(n, t)| prop::collection::vec(prop::collection::vec(-1.0..=1.0f64, n), t))
}

fn unit_losses(n: usize, max_t: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64], n),
        1..=max_t,
    )
}

fn simplex(max_n: usize) -> impl Strategy<Value = ProbabilityVector> {
    prop::collection::vec(1e-6..1.0f64, 2..=max_n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        ProbabilityVector::new(w.into_iter().map(|x| x / s).collect()).unwrap()
    })
}

fn schedule_for(kind: LearnerKind, n: usize) -> StepSchedule {
    match kind {
        LearnerKind::FixedMw => StepSchedule::fixed(0.37).unwrap(),
        _ => StepSchedule::default_adaptive(n).unwrap(),
    }
}

/// A stochastic instance with a unique best expert and a front-loaded budget.
fn corrupted_instance() -> impl Strategy<Value = (Vec<f64>, f64, u64, u64)> {
    (2..=6usize, 0.05..=1.0f64, 0.0..=60.0f64, 1..=600u64, any::<u64>()).prop_flat_map(|(n, delta, c, t, seed)| {
        prop::collection::vec(0.0..=1.0f64, n - 1).prop_map(move |rest| {
            let low = 0.5 * (1.0 - delta);
            let mut means = vec![low];
            means.extend(rest.into_iter().map(|u| low + delta + u * (1.0 - low - delta)));
            (means, c, t, seed)
        })
    })
}

fn adaptive_trace(means: &[f64], c: f64, t: u64, seed: u64) -> (StochasticSpec, robust_hedge_core::TrialTrace) {
    let spec = StochasticSpec::new(means.to_vec()).unwrap();
    let learner = Learner::new(
        LearnerKind::AdaptiveFtrl,
        StepSchedule::default_adaptive(spec.experts()).unwrap(),
        spec.experts(),
    )
    .unwrap();
    let mut corruption = CorruptionStrategy::front_load(c, spec.best()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trace = simulate(learner, &spec, &mut corruption, &mut rng, t, RecordPolicy::All).unwrap();
    (spec, trace)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn softmax_is_shift_invariant(logits in prop::collection::vec(-50.0..50.0f64, 2..20), shift in -1e3..1e3f64) {
        let a = normalize_from_logits(&logits).unwrap();
        let shifted: Vec<f64> = logits.iter().map(|x| x + shift).collect();
        let b = normalize_from_logits(&shifted).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12);
    }

    #[test]
    fn softmax_survives_extreme_logits(big in 1e2..1e300f64, n in 2..10usize) {
        let mut logits = vec![-big; n];
        logits[0] = big;
        let p = normalize_from_logits(&logits).unwrap();
        prop_assert_eq!(p[0], 1.0);
    }

    #[test]
    fn entropy_is_at_most_log_n(p in simplex(40)) {
        let h = entropy(&p);
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (p.dim() as f64).ln() + 1e-12);
        let u = ProbabilityVector::uniform(p.dim()).unwrap();
        prop_assert!((entropy(&u) - (p.dim() as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn adaptive_step_strictly_decreases(alpha in 1e-3..10.0f64, t in 1..1_000_000u64) {
        let s = StepSchedule::adaptive(alpha).unwrap();
        prop_assert!(step_size(s, t + 1).unwrap() < step_size(s, t).unwrap());
        prop_assert_eq!(step_size(StepSchedule::fixed(alpha).unwrap(), t).unwrap(), alpha);
    }

    #[test]
    fn plays_are_translation_invariant(g in signed_losses(6, 60), shifts in prop::collection::vec(-3.0..3.0f64, 60)) {
        let n = g[0].len();
        let shifted: Vec<Vec<f64>> = g.iter().zip(&shifts).map(|(row, &a)| translate(row, a)).collect();
        for kind in LearnerKind::ALL {
            let a = trajectory(Learner::new(kind, schedule_for(kind, n), n).unwrap(), &g).unwrap();
            let b = trajectory(Learner::new(kind, schedule_for(kind, n), n).unwrap(), &shifted).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(x.max_abs_diff(y) <= 1e-9, "{:?}", kind);
            }
        }
    }

    #[test]
    fn fixed_step_ftrl_equals_omd(g in signed_losses(8, 200), eta in 0.01..2.0f64) {
        prop_assert!(check_fixed_equivalence(&g, eta).unwrap().passed());
    }

    #[test]
    fn second_order_bound_holds(g in signed_losses(8, 200), eta in 0.01..1.0f64) {
        let r = check_second_order_bound(&g, eta).unwrap();
        prop_assert!(r.passed(), "{:?}", r.first_violation);
    }

    #[test]
    fn adaptive_regret_inequality_holds(g in signed_losses(8, 300)) {
        let r = check_adaptive_regret_inequality(&g).unwrap();
        prop_assert!(r.passed(), "{:?}", r.first_violation);
    }

    #[test]
    fn stability_ratio_holds(n in 2..=12usize, g in unit_losses(12, 400)) {
        let g: Vec<Vec<f64>> = g.into_iter().map(|row| row[..n].to_vec()).collect();
        let learner = Learner::new(LearnerKind::AdaptiveFtrl, StepSchedule::default_adaptive(n).unwrap(), n).unwrap();
        let plays = trajectory(learner, &g).unwrap();
        let r = check_stability_ratio(&plays, n).unwrap();
        prop_assert!(r.passed(), "{:?}", r.first_violation);
    }

    #[test]
    fn entropy_lemma_holds(p in simplex(64), delta in 0.01..=1.0f64, scale in 1.0..100.0f64, best in any::<prop::sample::Index>()) {
        let tau = entropy_lemma_tau0(delta, p.dim()) * scale;
        let best = best.index(p.dim());
        let r = check_entropy_lemma(&[EntropySample { p, delta, tau, best }]).unwrap();
        prop_assert!(r.passed(), "{:?}", r.first_violation);
    }

    #[test]
    fn observations_hold_on_corrupted_traces((means, c, t, seed) in corrupted_instance()) {
        let (spec, trace) = adaptive_trace(&means, c, t, seed);
        prop_assert!(trace.total_corruption() <= c + 1e-9);
        let r = check_observations(&trace, spec.means()).unwrap();
        prop_assert!(r.passed(), "{:?}", r.first_violation);
    }

    #[test]
    fn sum_bounds_hold_on_corrupted_traces((means, c, t, seed) in corrupted_instance()) {
        let (spec, trace) = adaptive_trace(&means, c, t, seed);
        let r = check_sum_bounds(&trace, spec.means()).unwrap();
        prop_assert!(r.passed(), "{:?}", r.first_violation);
    }

    #[test]
    fn regret_increment_is_bounded_by_the_largest_gap(
        (p, means) in simplex(10).prop_flat_map(|p| {
            let n = p.dim();
            (Just(p), prop::collection::vec(0.0..=1.0f64, n))
        })
    ) {
        let min = means.iter().copied().fold(f64::INFINITY, f64::min);
        let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let r = pseudo_regret_increment(&p, &means).unwrap();
        prop_assert!(r >= -1e-15 && r <= max - min + 1e-15);
    }

    #[test]
    fn uniform_play_accrues_half_the_gap(delta in 0.01..=1.0f64, t in 1..5000u64) {
        let spec = StochasticSpec::with_gap(2, delta).unwrap();
        let u = ProbabilityVector::uniform(2).unwrap();
        let total: f64 = (0..t).map(|_| spec.pseudo_regret_increment(&u)).sum();
        prop_assert!((total - t as f64 * delta / 2.0).abs() <= 1e-9 * t as f64);
    }
}
