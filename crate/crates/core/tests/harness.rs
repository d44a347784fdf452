use proptest::prelude::*;
use qpc_core::harness::*;
use qpc_core::protocol::{run_protocol, Verdict};

fn small(name: &str, trials: u64, base_seed: u64) -> Scenario {
    let mut s = Scenario::named(name).unwrap();
    s.trials = trials;
    s.base_seed = base_seed;
    s
}

#[test]
fn named_scenarios_exist() {
    for name in Scenario::NAMES {
        let s = Scenario::named(name).unwrap();
        s.validate().unwrap();
        assert_eq!(s.name, name);
    }
    assert!(Scenario::named("nope").is_none());
    let mut s = small("honest", 0, 0);
    assert!(s.validate().is_err());
    s.trials = 1;
    s.config.hash_len = 0;
    assert!(run_trials(&s).is_err());
}

#[test]
fn reruns_are_byte_identical() {
    for name in Scenario::NAMES {
        let s = small(name, 300, 17);
        let a = serde_json::to_string(&run_trials(&s).unwrap()).unwrap();
        let b = serde_json::to_string(&run_trials(&s).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn trial_configs_are_reproducible_and_distinct() {
    let s = small("honest", 10, 5);
    assert_eq!(s.trial_config(3), s.trial_config(3));
    assert_ne!(s.trial_config(3).seed, s.trial_config(4).seed);
    assert_eq!(s.trial_config(3).seed, trial_seed(5, 3));
    let c = s.trial_config(0);
    assert_ne!(c.x, c.y);
    assert_eq!(c.x.len(), 12);

    let mut eq = s.clone();
    eq.inputs = InputPolicy::EqualPairs;
    let c = eq.trial_config(0);
    assert_eq!(c.x, c.y);

    let mut fixed = s;
    fixed.inputs = InputPolicy::Fixed;
    fixed.config.x = "abc".into();
    fixed.config.y = "abd".into();
    let c = fixed.trial_config(9);
    assert_eq!((c.x.as_str(), c.y.as_str()), ("abc", "abd"));
}

#[test]
fn sink_sees_every_trial_in_order() {
    let s = small("eve", 40, 2);
    let mut seen = Vec::new();
    let stats = run_trials_with(&s, |t, tr| {
        assert_eq!(tr, &run_protocol(&s.trial_config(t)).unwrap());
        seen.push(t);
        Ok(())
    })
    .unwrap();
    assert_eq!(seen, (0..40).collect::<Vec<_>>());
    assert_eq!(stats.trials + stats.excluded_hash_collisions.len() as u64, 40);
}

#[test]
fn stats_count_verdicts() {
    let honest = run_trials(&small("honest", 200, 0)).unwrap();
    assert_eq!(honest.verdicts(Verdict::Unequal), 200);
    assert_eq!(honest.wrong_verdicts, 0);
    assert_eq!(honest.mean_sampling_inconsistency, 0.0);
    assert_eq!(honest.tp_inference_correct, 0);

    let attack = run_trials(&small("attack-original", 200, 0)).unwrap();
    assert_eq!(attack.wrong_verdicts, 200);
    assert_eq!(attack.detection_count, 0);
    assert_eq!(attack.tp_inference_correct, 200);
    assert_eq!(attack.seeds_of_failures.len(), 100);

    let improved = run_trials(&small("attack-improved", 200, 0)).unwrap();
    assert_eq!(improved.detection_count, 200);
    assert!((improved.detection_rate() - 1.0).abs() < 1e-12);
    assert!(improved.mean_sampling_inconsistency > 0.5);
}

#[test]
fn sampling_inconsistency_matches_three_quarters() {
    let stats = run_trials(&small("attack-improved", 500, 3)).unwrap();
    let n = stats.sampling_checked as f64;
    let sigma = (0.75 * 0.25 / n).sqrt();
    assert!((stats.mean_sampling_inconsistency - 0.75).abs() <= 3.0 * sigma + 1e-6);
}

#[test]
fn predictions() {
    assert_eq!(predict_attack_detection(1), 0.75);
    assert_eq!(predict_attack_detection(2), 0.9375);
    assert_eq!(predict_eve_detection(1), 0.25);
    assert!((predict_eve_detection(16) - 0.98997740).abs() < 1e-8);
    assert!(compare_to_prediction(0.75, 10, 0.75).is_err());
    let r = compare_to_prediction(0.76, 10_000, 0.75).unwrap();
    assert!(r.pass);
    assert!((r.sigma - 0.0043301270).abs() < 1e-9);
    assert!(!compare_to_prediction(0.80, 10_000, 0.75).unwrap().pass);
    let exact = compare_to_prediction(0.0, 1000, 0.0).unwrap();
    assert!(exact.pass);
    let missed = compare_to_prediction(0.001, 1000, 0.0).unwrap();
    assert!(!missed.pass);
    assert!(serde_json::to_string(&missed).unwrap().contains("\"z\":null"));
}

#[test]
fn round_sig6_examples() {
    assert_eq!(round_sig6(0.0), 0.0);
    assert_eq!(round_sig6(0.123456789), 0.123457);
    assert_eq!(round_sig6(1234567.0), 1234570.0);
    assert_eq!(round_sig6(-0.000987654321), -0.000987654);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_ranges_merge_to_the_whole(
        idx in 0usize..4,
        a in 0u64..60,
        extra in 0u64..60,
        base in any::<u64>(),
    ) {
        let b = a + extra;
        let s = small(Scenario::NAMES[idx], b, base);
        let whole = run_range(&s, 0..b).unwrap();
        let parts = run_range(&s, 0..a).unwrap().merge(run_range(&s, a..b).unwrap());
        prop_assert_eq!(whole, parts);
    }
}
