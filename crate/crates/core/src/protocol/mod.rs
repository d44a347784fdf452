//! The comparison protocol between Bob, Charlie and the third party (TP), in
//! its original form and with randomized sampling pairs.
//!
//! A run produces a [`Transcript`] recording every announcement, check and
//! verdict. The step functions in [`steps`] are public so each can be driven
//! and tested on its own; [`run_protocol`] chains them.

mod steps;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::adversary::{Channel, EveModel, TpBehavior, TpInference, TpKind};
use crate::error::{Error, Result};
use crate::quantum::{encoding_pair_count, BellCode, DecoyState, PauliOp};

pub use steps::{
    check_decoys, deduce_comparison, disarrange, disarrangement_order, improved_sampling_ops,
    participant_encode, run_protocol, sampling_reveal_count, tp_measure_and_announce, tp_prepare,
    verify_sampling, Prepared, Slot,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    #[serde(alias = "original")]
    Original,
    /// Participants apply published random unitaries to the sampling pairs.
    #[serde(alias = "improved")]
    Improved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub variant: Variant,
    /// Number of EPR pairs TP prepares.
    pub n_pairs: usize,
    /// Digest length in bits.
    pub hash_len: usize,
    pub decoy_count_per_channel: usize,
    pub reveal_fraction_sampling: f64,
    /// Largest tolerated mismatch rate on the revealed sampling pairs.
    pub inconsistency_threshold: f64,
    /// Largest tolerated error rate on any channel's decoys.
    pub decoy_threshold: f64,
    pub tp_behavior: TpKind,
    pub attack_state: BellCode,
    pub eve_on: BTreeSet<Channel>,
    pub seed: u64,
    pub x: String,
    pub y: String,
    /// Shared hash key; drawn from the participants' stream when absent.
    pub hash_key: Option<u64>,
    /// Shared disarrangement secret; drawn like `hash_key` when absent.
    pub disarrange_secret: Option<u64>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            variant: Variant::Original,
            n_pairs: 32,
            hash_len: 32,
            decoy_count_per_channel: 16,
            reveal_fraction_sampling: 1.0,
            inconsistency_threshold: 0.0,
            decoy_threshold: 0.0,
            tp_behavior: TpKind::Honest,
            attack_state: BellCode::PhiPlus,
            eve_on: BTreeSet::new(),
            seed: 0,
            x: String::new(),
            y: String::new(),
            hash_key: None,
            disarrange_secret: None,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.hash_len == 0 {
            return bad("hash_len must be at least 1".into());
        }
        let m = self.encoding_pairs();
        if self.n_pairs <= m {
            return bad(format!(
                "n_pairs must exceed ceil(hash_len/2) = {m} so at least one sampling pair exists, got {}",
                self.n_pairs
            ));
        }
        let f = self.reveal_fraction_sampling;
        if !(f > 0.0 && f <= 1.0) {
            return bad(format!("reveal_fraction_sampling must be in (0, 1], got {f}"));
        }
        for (name, t) in [
            ("inconsistency_threshold", self.inconsistency_threshold),
            ("decoy_threshold", self.decoy_threshold),
        ] {
            if !(0.0..1.0).contains(&t) {
                return bad(format!("{name} must be in [0, 1), got {t}"));
            }
        }
        Ok(())
    }

    pub fn encoding_pairs(&self) -> usize {
        encoding_pair_count(self.hash_len)
    }

    pub fn sampling_pairs(&self) -> usize {
        self.n_pairs.saturating_sub(self.encoding_pairs())
    }

    pub fn behavior(&self) -> TpBehavior {
        TpBehavior {
            kind: self.tp_behavior,
            attack_state: self.attack_state,
        }
    }

    pub fn eve(&self) -> EveModel {
        EveModel::on(self.eve_on.iter().copied())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    Encoding,
    Sampling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Equal,
    Unequal,
    AbortEavesdropper,
    AbortTpCheating,
}

impl Verdict {
    pub fn is_abort(self) -> bool {
        matches!(self, Verdict::AbortEavesdropper | Verdict::AbortTpCheating)
    }
}

/// Lifecycle of one EPR pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub original_index: usize,
    pub role: Role,
    pub initial: BellCode,
    pub op_b: PauliOp,
    pub op_c: PauliOp,
    /// Position in the returned sequences; set by disarrangement.
    pub shuffled_position: Option<usize>,
    pub tp_outcome_announced: Option<BellCode>,
    pub tp_outcome_true: Option<BellCode>,
    /// An eavesdropper measured one of the halves in transit.
    pub collapsed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoyRecord {
    pub channel: Channel,
    pub position: usize,
    pub prepared: DecoyState,
    pub measured_value: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoyCheck {
    pub checked: usize,
    pub mismatches: usize,
    pub error_rate: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingCheck {
    pub checked_positions: Vec<usize>,
    pub mismatches: usize,
    pub inconsistency_rate: f64,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishedOps {
    pub op_b: PauliOp,
    pub op_c: PauliOp,
}

/// Complete record of one run. Immutable once returned by [`run_protocol`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: ProtocolConfig,
    pub pairs: Vec<PairRecord>,
    pub decoys: Vec<DecoyRecord>,
    /// TP's early announcement of the sampling pairs' initial states, by original index.
    pub tp_preannouncement: BTreeMap<usize, BellCode>,
    /// Initial states of the encoding pairs, published by TP after the return trip.
    pub tp_initial_published: BTreeMap<usize, BellCode>,
    pub improved_sampling_ops_published: Option<BTreeMap<usize, PublishedOps>>,
    pub decoy_check_results: BTreeMap<Channel, DecoyCheck>,
    pub sampling_check: Option<SamplingCheck>,
    pub participant_verdict: Verdict,
    pub tp_inference: TpInference,
    pub ground_truth_equal: bool,
    pub hash_equal: bool,
}

impl Transcript {
    pub fn pair_at_position(&self, position: usize) -> Option<&PairRecord> {
        self.pairs.iter().find(|p| p.shuffled_position == Some(position))
    }

    /// Whether the participants reached the comparison step.
    pub fn compared(&self) -> bool {
        !self.participant_verdict.is_abort()
    }
}
