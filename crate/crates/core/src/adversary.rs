//! Misbehaving parties: the third party's same-initial-states strategy and
//! its inference of the comparison result, plus an intercept-resend
//! eavesdropper on the quantum channels.
//!
//! Everything the third party decides goes through [`TpBehavior`], whose
//! methods only see what the third party legitimately holds: its own
//! prepared states and its own measurement outcomes.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::protocol::Variant;
use crate::quantum::{decoy_measure, Basis, BellCode, DecoyState, Pair, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TpKind {
    #[serde(alias = "honest")]
    Honest,
    #[serde(alias = "same-state", alias = "same_state_attack")]
    SameStateAttack,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TpInference {
    Equal,
    Unequal,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TpBehavior {
    pub kind: TpKind,
    /// Only consulted for [`TpKind::SameStateAttack`].
    pub attack_state: BellCode,
}

impl TpBehavior {
    pub const HONEST: TpBehavior = TpBehavior {
        kind: TpKind::Honest,
        attack_state: BellCode::PhiPlus,
    };

    pub fn same_state(attack_state: BellCode) -> Self {
        TpBehavior { kind: TpKind::SameStateAttack, attack_state }
    }

    pub fn is_attack(&self) -> bool {
        self.kind == TpKind::SameStateAttack
    }

    /// Initial Bell states of the `n` pairs.
    pub fn prepare_initial<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<BellCode> {
        match self.kind {
            TpKind::Honest => (0..n).map(|_| BellCode::from_code(rng.random_range(0..4))).collect(),
            TpKind::SameStateAttack => vec![self.attack_state; n],
        }
    }

    /// Outcomes the third party commits to, one per received position.
    pub fn announce(&self, measured: &[BellCode]) -> Vec<BellCode> {
        match self.kind {
            TpKind::Honest => measured.to_vec(),
            TpKind::SameStateAttack => vec![self.attack_state; measured.len()],
        }
    }
}

impl Default for TpBehavior {
    fn default() -> Self {
        TpBehavior::HONEST
    }
}

/// What the attacking third party concludes from its own true outcomes.
///
/// With every pair prepared in `attack_state` and nothing applied to the
/// sampling pairs, all outcomes equal `attack_state` exactly when the two
/// hashes agree. The improved variant randomizes the sampling pairs, so the
/// rule does not apply there and the result is `Unknown`.
pub fn tp_infer_result(true_outcomes: &[BellCode], behavior: &TpBehavior, variant: Variant) -> TpInference {
    if !behavior.is_attack() || variant != Variant::Original {
        return TpInference::Unknown;
    }
    if true_outcomes.iter().all(|&o| o == behavior.attack_state) {
        TpInference::Equal
    } else {
        TpInference::Unequal
    }
}

/// The four quantum channels of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "tp-b")]
    TpToB,
    #[serde(rename = "tp-c")]
    TpToC,
    #[serde(rename = "b-tp")]
    BToTp,
    #[serde(rename = "c-tp")]
    CToTp,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::TpToB, Channel::TpToC, Channel::BToTp, Channel::CToTp];

    pub fn name(self) -> &'static str {
        match self {
            Channel::TpToB => "tp-b",
            Channel::TpToC => "tp-c",
            Channel::BToTp => "b-tp",
            Channel::CToTp => "c-tp",
        }
    }

    /// Which half of each pair travels on this channel.
    pub fn side(self) -> Side {
        match self {
            Channel::TpToB | Channel::BToTp => Side::B,
            Channel::TpToC | Channel::CToTp => Side::C,
        }
    }

    pub fn parse(s: &str) -> Option<Channel> {
        Channel::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EveStrategy {
    InterceptResend,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EveModel {
    pub channels: BTreeSet<Channel>,
    pub strategy: EveStrategy,
}

impl EveModel {
    pub fn on(channels: impl IntoIterator<Item = Channel>) -> Self {
        EveModel {
            channels: channels.into_iter().collect(),
            strategy: EveStrategy::InterceptResend,
        }
    }

    pub fn taps(&self, channel: Channel) -> bool {
        self.channels.contains(&channel)
    }
}

/// A photon in flight, as Eve gets to touch it.
pub enum Photon<'a> {
    Decoy(&'a mut DecoyState),
    Half { pair: &'a mut Pair, side: Side },
}

/// Measure in a uniformly random basis and forward the eigenstate found.
/// Returns the basis Eve used and the value she read.
pub fn eve_intercept_resend<R: Rng + ?Sized>(photon: Photon<'_>, rng: &mut R) -> (Basis, bool) {
    let basis = Basis::random(rng);
    let value = match photon {
        Photon::Decoy(state) => {
            let (value, post) = decoy_measure(*state, basis, rng);
            *state = post;
            value
        }
        Photon::Half { pair, side } => pair.measure_side(side, basis, rng),
    };
    (basis, value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::BasisState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn attack_prepares_and_announces_one_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tp = TpBehavior::same_state(BellCode::PhiPlus);
        assert_eq!(tp.prepare_initial(5, &mut rng), vec![BellCode::PhiPlus; 5]);
        let measured = [BellCode::PsiMinus, BellCode::PhiPlus];
        assert_eq!(tp.announce(&measured), vec![BellCode::PhiPlus; 2]);
        assert_eq!(TpBehavior::HONEST.announce(&measured), measured.to_vec());
    }

    #[test]
    fn honest_preparation_is_uniform() {
        let n = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let states = TpBehavior::HONEST.prepare_initial(n, &mut rng);
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for b in BellCode::ALL {
            let k = states.iter().filter(|&&s| s == b).count() as f64;
            assert!((k - n as f64 * 0.25).abs() <= 3.0 * sigma, "{b}: {k}");
        }
    }

    #[test]
    fn inference_rules() {
        let attack = TpBehavior::same_state(BellCode::PhiPlus);
        let all_phi = [BellCode::PhiPlus; 4];
        let mixed = [BellCode::PhiPlus, BellCode::PsiPlus];
        assert_eq!(tp_infer_result(&all_phi, &attack, Variant::Original), TpInference::Equal);
        assert_eq!(tp_infer_result(&mixed, &attack, Variant::Original), TpInference::Unequal);
        assert_eq!(tp_infer_result(&all_phi, &TpBehavior::HONEST, Variant::Original), TpInference::Unknown);
        assert_eq!(tp_infer_result(&all_phi, &attack, Variant::Improved), TpInference::Unknown);
    }

    #[test]
    fn eve_on_matched_decoy_is_invisible() {
        // |0⟩ read in Z by Eve is forwarded as |0⟩
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let mut d = BasisState::new(Basis::Z, false);
            let (basis, _) = eve_intercept_resend(Photon::Decoy(&mut d), &mut rng);
            if basis == Basis::Z {
                assert_eq!(d, BasisState::new(Basis::Z, false));
            }
        }
    }

    // Exact enumeration: decoy state (4) × Eve basis (2) × Eve outcome, each
    // weighted by its Born probability, then the receiver's mismatch probability.
    #[test]
    fn per_decoy_detection_is_one_quarter_by_enumeration() {
        let mut total = 0.0;
        for prepared in BasisState::ALL {
            for eve_basis in [Basis::Z, Basis::X] {
                for eve_value in [false, true] {
                    let p_outcome = if eve_basis == prepared.basis {
                        if eve_value == prepared.value { 1.0 } else { 0.0 }
                    } else {
                        0.5
                    };
                    let forwarded = BasisState::new(eve_basis, eve_value);
                    let p_mismatch = if forwarded.basis == prepared.basis {
                        if forwarded.value == prepared.value { 0.0 } else { 1.0 }
                    } else {
                        0.5
                    };
                    total += 0.25 * 0.5 * p_outcome * p_mismatch;
                }
            }
        }
        assert_eq!(total, 0.25);
    }

    #[test]
    fn tapped_decoy_detection_rate() {
        let n = 10_000u32;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut detected = 0u32;
        for _ in 0..n {
            let prepared = crate::quantum::decoy_prepare(&mut rng);
            let mut flight = prepared;
            eve_intercept_resend(Photon::Decoy(&mut flight), &mut rng);
            let (v, _) = decoy_measure(flight, prepared.basis, &mut rng);
            if v != prepared.value {
                detected += 1;
            }
        }
        let p = 0.25;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((detected as f64 / n as f64 - p).abs() <= 3.0 * sigma);
    }

    #[test]
    fn channel_names_round_trip() {
        for c in Channel::ALL {
            assert_eq!(Channel::parse(c.name()), Some(c));
        }
        assert_eq!(Channel::parse("tp-d"), None);
    }
}
