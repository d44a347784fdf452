//! Seeded Monte-Carlo runner and the closed-form detection probabilities it
//! is checked against.
//!
//! Trial `t` of a scenario runs with seed `mix64(base_seed ^ t)`, so any
//! single trial can be replayed on its own and the aggregate does not depend
//! on how trials are scheduled across threads.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::distr::{Alphanumeric, SampleString};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::adversary::{Channel, TpInference, TpKind};
use crate::error::{Error, Result};
use crate::hashing::mix64;
use crate::protocol::{run_protocol, ProtocolConfig, Transcript, Variant, Verdict};

/// Failure seeds kept in [`TrialStats`]; the earliest trials win.
pub const MAX_FAILURE_SEEDS: usize = 100;

const CHUNK: u64 = 2048;
const INPUT_STREAM: u64 = 7;
const INPUT_LEN: usize = 12;

/// Round to 6 significant digits so output is stable across platforms.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let k = 5 - x.abs().log10().floor() as i32;
    if k >= 0 {
        let f = 10f64.powi(k);
        (x * f).round() / f
    } else {
        let f = 10f64.powi(-k);
        (x / f).round() * f
    }
}

fn sig6<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig6(*x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InputPolicy {
    /// Use the template's `x` and `y` as given.
    Fixed,
    /// Fresh random `x` per trial with `y = x`.
    EqualPairs,
    /// Fresh random `x != y` per trial.
    RandomPairs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub config: ProtocolConfig,
    pub trials: u64,
    pub base_seed: u64,
    pub inputs: InputPolicy,
}

impl Scenario {
    pub const NAMES: [&'static str; 4] = ["honest", "attack-original", "attack-improved", "eve"];

    /// The canonical scenarios, with 1000 trials from base seed 0.
    pub fn named(name: &str) -> Option<Scenario> {
        let mut config = ProtocolConfig::default();
        match name {
            "honest" => {}
            "attack-original" => config.tp_behavior = TpKind::SameStateAttack,
            "attack-improved" => {
                config.tp_behavior = TpKind::SameStateAttack;
                config.variant = Variant::Improved;
            }
            "eve" => {
                config.eve_on.insert(Channel::TpToB);
            }
            _ => return None,
        }
        Some(Scenario {
            name: name.to_string(),
            config,
            trials: 1000,
            base_seed: 0,
            inputs: InputPolicy::RandomPairs,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        self.config.validate()
    }

    /// The exact config trial `t` runs with.
    pub fn trial_config(&self, t: u64) -> ProtocolConfig {
        let seed = trial_seed(self.base_seed, t);
        let mut config = self.config.clone();
        config.seed = seed;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(INPUT_STREAM);
        match self.inputs {
            InputPolicy::Fixed => {}
            InputPolicy::EqualPairs => {
                config.x = random_input(&mut rng);
                config.y = config.x.clone();
            }
            InputPolicy::RandomPairs => {
                config.x = random_input(&mut rng);
                config.y = loop {
                    let y = random_input(&mut rng);
                    if y != config.x {
                        break y;
                    }
                };
            }
        }
        config
    }
}

fn random_input<R: Rng + ?Sized>(rng: &mut R) -> String {
    Alphanumeric.sample_string(rng, INPUT_LEN)
}

pub fn trial_seed(base_seed: u64, t: u64) -> u64 {
    mix64(base_seed ^ t).0
}

/// Aggregated counters over a contiguous range of trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub scenario: String,
    pub base_seed: u64,
    /// Trials counted, i.e. not excluded as hash collisions.
    pub trials: u64,
    pub verdict_counts: BTreeMap<Verdict, u64>,
    /// Comparison verdicts that disagree with `x == y`.
    pub wrong_verdicts: u64,
    pub tp_inference_correct: u64,
    /// Runs aborted because TP was caught cheating.
    pub detection_count: u64,
    /// Runs aborted by a failed decoy check.
    pub eavesdropper_detections: u64,
    #[serde(serialize_with = "sig6")]
    pub mean_sampling_inconsistency: f64,
    pub sampling_mismatches: u64,
    pub sampling_checked: u64,
    pub seeds_of_failures: Vec<u64>,
    /// Seeds where `x != y` but the digests collided; left out of every counter.
    pub excluded_hash_collisions: Vec<u64>,
}

impl TrialStats {
    pub fn empty(scenario: &str, base_seed: u64) -> Self {
        TrialStats {
            scenario: scenario.to_string(),
            base_seed,
            trials: 0,
            verdict_counts: BTreeMap::new(),
            wrong_verdicts: 0,
            tp_inference_correct: 0,
            detection_count: 0,
            eavesdropper_detections: 0,
            mean_sampling_inconsistency: 0.0,
            sampling_mismatches: 0,
            sampling_checked: 0,
            seeds_of_failures: Vec::new(),
            excluded_hash_collisions: Vec::new(),
        }
    }

    pub fn verdicts(&self, v: Verdict) -> u64 {
        self.verdict_counts.get(&v).copied().unwrap_or(0)
    }

    pub fn detection_rate(&self) -> f64 {
        rate(self.detection_count, self.trials)
    }

    pub fn eavesdropper_rate(&self) -> f64 {
        rate(self.eavesdropper_detections, self.trials)
    }

    fn refresh_mean(&mut self) {
        self.mean_sampling_inconsistency = rate(self.sampling_mismatches, self.sampling_checked);
    }

    pub fn record(&mut self, seed: u64, t: &Transcript) {
        let truth = t.ground_truth_equal;
        if !truth && t.hash_equal {
            self.excluded_hash_collisions.push(seed);
            return;
        }
        self.trials += 1;
        let v = t.participant_verdict;
        *self.verdict_counts.entry(v).or_insert(0) += 1;
        match v {
            Verdict::Equal | Verdict::Unequal => {
                if (v == Verdict::Equal) != truth {
                    self.wrong_verdicts += 1;
                    if self.seeds_of_failures.len() < MAX_FAILURE_SEEDS {
                        self.seeds_of_failures.push(seed);
                    }
                }
            }
            Verdict::AbortTpCheating => self.detection_count += 1,
            Verdict::AbortEavesdropper => self.eavesdropper_detections += 1,
        }
        let inferred = match t.tp_inference {
            TpInference::Equal => Some(true),
            TpInference::Unequal => Some(false),
            TpInference::Unknown => None,
        };
        if inferred == Some(truth) {
            self.tp_inference_correct += 1;
        }
        if let Some(check) = &t.sampling_check {
            self.sampling_checked += check.checked_positions.len() as u64;
            self.sampling_mismatches += check.mismatches as u64;
        }
        self.refresh_mean();
    }

    /// Combine with the stats of the trial range that immediately follows.
    pub fn merge(mut self, later: TrialStats) -> TrialStats {
        assert_eq!(self.base_seed, later.base_seed, "merging different scenarios");
        self.trials += later.trials;
        for (v, c) in later.verdict_counts {
            *self.verdict_counts.entry(v).or_insert(0) += c;
        }
        self.wrong_verdicts += later.wrong_verdicts;
        self.tp_inference_correct += later.tp_inference_correct;
        self.detection_count += later.detection_count;
        self.eavesdropper_detections += later.eavesdropper_detections;
        self.sampling_mismatches += later.sampling_mismatches;
        self.sampling_checked += later.sampling_checked;
        self.seeds_of_failures.extend(later.seeds_of_failures);
        self.seeds_of_failures.truncate(MAX_FAILURE_SEEDS);
        self.excluded_hash_collisions.extend(later.excluded_hash_collisions);
        self.refresh_mean();
        self
    }
}

fn rate(k: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

pub fn run_trials(scenario: &Scenario) -> Result<TrialStats> {
    run_trials_with(scenario, |_, _| Ok(()))
}

/// Run every trial, handing each transcript to `sink` in trial order.
pub fn run_trials_with<F>(scenario: &Scenario, sink: F) -> Result<TrialStats>
where
    F: FnMut(u64, &Transcript) -> Result<()>,
{
    scenario.validate()?;
    run_range_with(scenario, 0..scenario.trials, sink)
}

pub fn run_range(scenario: &Scenario, range: Range<u64>) -> Result<TrialStats> {
    run_range_with(scenario, range, |_, _| Ok(()))
}

fn run_range_with<F>(scenario: &Scenario, range: Range<u64>, mut sink: F) -> Result<TrialStats>
where
    F: FnMut(u64, &Transcript) -> Result<()>,
{
    let mut stats = TrialStats::empty(&scenario.name, scenario.base_seed);
    let mut start = range.start;
    while start < range.end {
        let end = (start + CHUNK).min(range.end);
        let batch: Vec<(u64, Transcript)> = (start..end)
            .into_par_iter()
            .map(|t| {
                let config = scenario.trial_config(t);
                run_protocol(&config).map(|tr| (config.seed, tr))
            })
            .collect::<Result<_>>()?;
        for (offset, (seed, tr)) in batch.iter().enumerate() {
            sink(start + offset as u64, tr)?;
            stats.record(*seed, tr);
        }
        start = end;
    }
    Ok(stats)
}

/// Probability that an attacking TP is caught when `s` sampling pairs are
/// checked at threshold 0: each survives only if `uB ⊕ uC = 00`.
pub fn predict_attack_detection(s: u32) -> f64 {
    1.0 - 0.25f64.powi(s as i32)
}

/// Probability that intercept-resend on `d` decoys trips at least one.
pub fn predict_eve_detection(d: u32) -> f64 {
    1.0 - 0.75f64.powi(d as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionReport {
    #[serde(serialize_with = "sig6")]
    pub empirical: f64,
    #[serde(serialize_with = "sig6")]
    pub predicted: f64,
    pub trials: u64,
    #[serde(serialize_with = "sig6")]
    pub sigma: f64,
    /// Infinite (serialized as null) when the prediction is 0 or 1 and missed.
    #[serde(serialize_with = "sig6")]
    pub z: f64,
    pub pass: bool,
}

/// Pass iff `|empirical − predicted| ≤ 3·sqrt(p(1−p)/trials)`.
pub fn compare_to_prediction(empirical: f64, trials: u64, predicted: f64) -> Result<PredictionReport> {
    if trials < 30 {
        return Err(Error::TooFewTrials(trials));
    }
    let sigma = (predicted * (1.0 - predicted) / trials as f64).sqrt();
    let diff = empirical - predicted;
    let z = if sigma > 0.0 {
        diff / sigma
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    };
    Ok(PredictionReport {
        empirical,
        predicted,
        trials,
        sigma,
        z,
        pass: diff.abs() <= 3.0 * sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attack_prediction_matches_enumeration() {
        let consistent = crate::quantum::PauliOp::ALL
            .iter()
            .flat_map(|&a| crate::quantum::PauliOp::ALL.map(move |b| a ^ b))
            .filter(|&x| x == crate::quantum::PauliOp::I)
            .count();
        assert_eq!(consistent, 4);
        assert_eq!(predict_attack_detection(0), 0.0);
        assert_eq!(predict_attack_detection(1), 1.0 - consistent as f64 / 16.0);
        assert!((predict_attack_detection(10) - (1.0 - 9.5367431640625e-7)).abs() < 1e-15);
    }

    #[test]
    fn eve_prediction_values() {
        assert_eq!(predict_eve_detection(0), 0.0);
        assert_eq!(predict_eve_detection(1), 0.25);
        assert!((predict_eve_detection(20) - 0.996828).abs() < 1e-6);
    }

    #[test]
    fn compare_examples() {
        let r = compare_to_prediction(0.75, 10_000, 0.75).unwrap();
        assert!(r.pass && r.z == 0.0);
        let r = compare_to_prediction(0.80, 10_000, 0.75).unwrap();
        assert!(!r.pass);
        assert!((r.z - 11.547).abs() < 1e-3);
        assert!(compare_to_prediction(0.752, 10_000, 0.75).unwrap().pass);
        assert_eq!(compare_to_prediction(0.5, 29, 0.5), Err(Error::TooFewTrials(29)));
        let r = compare_to_prediction(0.01, 100, 0.0).unwrap();
        assert!(!r.pass && r.z.is_infinite());
    }

    #[test]
    fn sig6_rounding() {
        assert_eq!(round_sig6(0.75), 0.75);
        assert_eq!(round_sig6(1.0 / 3.0), 0.333333);
        assert_eq!(round_sig6(0.999999046325), 0.999999);
        assert_eq!(round_sig6(11.5470053837), 11.547);
        assert_eq!(round_sig6(1234567.0), 1234570.0);
        assert_eq!(round_sig6(0.0), 0.0);
    }

    #[test]
    fn trial_seeds_and_inputs_are_reproducible() {
        let s = Scenario::named("honest").unwrap();
        assert_eq!(trial_seed(0, 0), mix64(0).0);
        assert_eq!(s.trial_config(5), s.trial_config(5));
        assert_ne!(s.trial_config(5).seed, s.trial_config(6).seed);
        let c = s.trial_config(3);
        assert_ne!(c.x, c.y);
        let mut eq = s.clone();
        eq.inputs = InputPolicy::EqualPairs;
        let c = eq.trial_config(3);
        assert_eq!(c.x, c.y);
    }

    #[test]
    fn named_scenarios() {
        for name in Scenario::NAMES {
            let s = Scenario::named(name).unwrap();
            s.validate().unwrap();
        }
        assert!(Scenario::named("nope").is_none());
    }

    #[test]
    fn zero_trials_rejected() {
        let mut s = Scenario::named("honest").unwrap();
        s.trials = 0;
        assert!(run_trials(&s).is_err());
    }
}
