use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    DecoyCheck, DecoyRecord, PairRecord, ProtocolConfig, PublishedOps, Role, SamplingCheck,
    Transcript, Variant, Verdict,
};
use crate::adversary::{eve_intercept_resend, tp_infer_result, Channel, EveModel, Photon, TpBehavior, TpInference};
use crate::error::{Error, Result};
use crate::hashing::{sampling_positions, DisarrangeSecret, HashDigest, HashKey, SecretHash};
use crate::quantum::{
    decoy_measure, decoy_prepare, deduce_op_xor, encode_bits_to_ops, BellCode, DecoyState, Pair,
    PauliOp, Side,
};

// Independent random streams per party, so that e.g. switching Eve on does
// not shift what TP prepares.
const STREAM_TP: u64 = 1;
const STREAM_BOB: u64 = 2;
const STREAM_CHARLIE: u64 = 3;
const STREAM_SHARED: u64 = 4;
const STREAM_EVE: u64 = 5;
const STREAM_NATURE: u64 = 6;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// One photon slot of a channel payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// Half of the pair with this original index.
    Half(usize),
    /// Index into the run's decoy records.
    Decoy(usize),
}

/// TP's output from the preparation step.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub pairs: Vec<PairRecord>,
    pub lab: Vec<Pair>,
    pub payload_b: Vec<Slot>,
    pub payload_c: Vec<Slot>,
    pub decoys: Vec<DecoyRecord>,
}

/// Prepare the EPR pairs, split them into the two sequences and hide decoys
/// at random positions in each.
pub fn tp_prepare<R: Rng + ?Sized>(config: &ProtocolConfig, rng: &mut R) -> Prepared {
    let n = config.n_pairs;
    let m = config.encoding_pairs();
    let initial = config.behavior().prepare_initial(n, rng);
    let pairs = initial
        .iter()
        .enumerate()
        .map(|(i, &bell)| PairRecord {
            original_index: i,
            role: if i < m { Role::Encoding } else { Role::Sampling },
            initial: bell,
            op_b: PauliOp::I,
            op_c: PauliOp::I,
            shuffled_position: None,
            tp_outcome_announced: None,
            tp_outcome_true: None,
            collapsed: false,
        })
        .collect();
    let lab = initial.iter().map(|&b| Pair::new(b)).collect();
    let halves: Vec<usize> = (0..n).collect();
    let mut decoys = Vec::new();
    let d = config.decoy_count_per_channel;
    let payload_b = interleave_decoys(&halves, Channel::TpToB, d, &mut decoys, rng);
    let payload_c = interleave_decoys(&halves, Channel::TpToC, d, &mut decoys, rng);
    Prepared { pairs, lab, payload_b, payload_c, decoys }
}

fn interleave_decoys<R: Rng + ?Sized>(
    halves: &[usize],
    channel: Channel,
    count: usize,
    decoys: &mut Vec<DecoyRecord>,
    rng: &mut R,
) -> Vec<Slot> {
    let total = halves.len() + count;
    let mut is_decoy = vec![false; total];
    for p in sample(rng, total, count).iter() {
        is_decoy[p] = true;
    }
    let mut rest = halves.iter();
    (0..total)
        .map(|position| {
            if is_decoy[position] {
                decoys.push(DecoyRecord {
                    channel,
                    position,
                    prepared: decoy_prepare(rng),
                    measured_value: None,
                });
                Slot::Decoy(decoys.len() - 1)
            } else {
                Slot::Half(*rest.next().expect("slot count matches halves"))
            }
        })
        .collect()
}

struct Wire<'a> {
    eve: &'a EveModel,
    lab: &'a mut [Pair],
    pairs: &'a mut [PairRecord],
    flight: &'a mut Vec<DecoyState>,
}

impl Wire<'_> {
    fn transmit<R: Rng + ?Sized>(&mut self, channel: Channel, payload: &[Slot], eve_rng: &mut R) {
        if !self.eve.taps(channel) {
            return;
        }
        for slot in payload {
            let photon = match *slot {
                Slot::Half(i) => {
                    self.pairs[i].collapsed = true;
                    Photon::Half { pair: &mut self.lab[i], side: channel.side() }
                }
                Slot::Decoy(k) => Photon::Decoy(&mut self.flight[k]),
            };
            eve_intercept_resend(photon, eve_rng);
        }
    }
}

/// The receiver learns each decoy's position and basis from the sender and
/// measures in that basis.
fn measure_decoys<R: Rng + ?Sized>(
    channel: Channel,
    decoys: &mut [DecoyRecord],
    flight: &[DecoyState],
    rng: &mut R,
) {
    for (k, rec) in decoys.iter_mut().enumerate() {
        if rec.channel == channel {
            rec.measured_value = Some(decoy_measure(flight[k], rec.prepared.basis, rng).0);
        }
    }
}

/// Error rate of a batch of measured decoys; passes iff the rate is at most `threshold`.
pub fn check_decoys<'a>(
    records: impl IntoIterator<Item = &'a DecoyRecord>,
    threshold: f64,
) -> Result<DecoyCheck> {
    let mut checked = 0;
    let mut mismatches = 0;
    for rec in records {
        let measured = rec.measured_value.ok_or_else(|| Error::UnmeasuredDecoy {
            channel: rec.channel.to_string(),
            position: rec.position,
        })?;
        checked += 1;
        if measured != rec.prepared.value {
            mismatches += 1;
        }
    }
    let error_rate = if checked == 0 { 0.0 } else { mismatches as f64 / checked as f64 };
    Ok(DecoyCheck {
        checked,
        mismatches,
        error_rate,
        passed: error_rate <= threshold,
    })
}

fn set_op(rec: &mut PairRecord, side: Side, op: PauliOp) {
    match side {
        Side::B => rec.op_b = op,
        Side::C => rec.op_c = op,
    }
}

/// Record the hash-derived operations on the leading encoding pairs.
/// `pairs` must be in original order.
pub fn participant_encode(
    digest: &HashDigest,
    pairs: &mut [PairRecord],
    side: Side,
    hash_len: usize,
) -> Result<()> {
    if digest.len() != hash_len {
        return Err(Error::DigestLength { digest: digest.len(), expected: hash_len });
    }
    let ops = encode_bits_to_ops(digest.bits())?;
    if pairs.len() < ops.len() {
        return Err(Error::PairCount { needed: ops.len(), available: pairs.len() });
    }
    for (rec, op) in pairs.iter_mut().zip(ops) {
        debug_assert_eq!(rec.role, Role::Encoding);
        set_op(rec, side, op);
    }
    Ok(())
}

/// Draw an independent uniform operation for every sampling pair on one side.
/// Returns the operations by original index, for later publication.
pub fn improved_sampling_ops<R: Rng + ?Sized>(
    pairs: &mut [PairRecord],
    variant: Variant,
    side: Side,
    rng: &mut R,
) -> Result<BTreeMap<usize, PauliOp>> {
    if variant != Variant::Improved {
        return Err(Error::NotImprovedVariant);
    }
    let mut published = BTreeMap::new();
    for rec in pairs.iter_mut().filter(|r| r.role == Role::Sampling) {
        let op = PauliOp::random(rng);
        set_op(rec, side, op);
        published.insert(rec.original_index, op);
    }
    Ok(published)
}

/// Original index of the pair at each returned position. Sampling pairs go to
/// the positions drawn from `l`; encoding pairs fill the rest in order.
pub fn disarrangement_order(l: DisarrangeSecret, roles: &[Role]) -> Result<Vec<usize>> {
    let n = roles.len();
    let (sampling, encoding): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&i| roles[i] == Role::Sampling);
    let positions = sampling_positions(l, n, sampling.len())?;
    let mut order = vec![None; n];
    for (&idx, &pos) in sampling.iter().zip(&positions) {
        order[pos] = Some(idx);
    }
    let mut encoding = encoding.into_iter();
    for slot in order.iter_mut().filter(|s| s.is_none()) {
        *slot = encoding.next();
    }
    Ok(order.into_iter().map(|o| o.expect("every position filled")).collect())
}

/// Assign `shuffled_position` to every pair; returns the position → index map.
pub fn disarrange(pairs: &mut [PairRecord], l: DisarrangeSecret) -> Result<Vec<usize>> {
    let roles: Vec<Role> = pairs.iter().map(|p| p.role).collect();
    let order = disarrangement_order(l, &roles)?;
    for (pos, &idx) in order.iter().enumerate() {
        pairs[idx].shuffled_position = Some(pos);
    }
    Ok(order)
}

/// Bell-measure every received position. Returns `(true outcomes, announced outcomes)`.
///
/// TP only gets the pairs in received order, so nothing it announces can
/// depend on roles or on the disarrangement secret.
pub fn tp_measure_and_announce<R: Rng + ?Sized>(
    received: &[Pair],
    behavior: &TpBehavior,
    rng: &mut R,
) -> (Vec<BellCode>, Vec<BellCode>) {
    let measured: Vec<BellCode> = received.iter().map(|p| p.bell_measure(rng)).collect();
    let announced = behavior.announce(&measured);
    (measured, announced)
}

/// How many sampling positions the participants ask TP to reveal.
pub fn sampling_reveal_count(config: &ProtocolConfig) -> usize {
    let c = config.sampling_pairs();
    let s = (config.reveal_fraction_sampling * c as f64 - 1e-9).ceil() as usize;
    s.clamp(1, c.max(1)).min(c)
}

/// Compare TP's revealed sampling outcomes against what the participants expect.
pub fn verify_sampling(t: &Transcript, requested: &[usize]) -> Result<SamplingCheck> {
    let mut mismatches = 0;
    for &pos in requested {
        let rec = t.pair_at_position(pos).ok_or(Error::MissingAnnouncement(pos))?;
        let announced = rec.tp_outcome_announced.ok_or(Error::MissingAnnouncement(pos))?;
        let pre = *t
            .tp_preannouncement
            .get(&rec.original_index)
            .ok_or(Error::MissingAnnouncement(pos))?;
        let expected = match t.config.variant {
            Variant::Original => pre,
            Variant::Improved => {
                let ops = t
                    .improved_sampling_ops_published
                    .as_ref()
                    .and_then(|m| m.get(&rec.original_index))
                    .ok_or(Error::MissingAnnouncement(pos))?;
                pre ^ (ops.op_b ^ ops.op_c)
            }
        };
        if announced != expected {
            mismatches += 1;
        }
    }
    let inconsistency_rate = if requested.is_empty() {
        0.0
    } else {
        mismatches as f64 / requested.len() as f64
    };
    Ok(SamplingCheck {
        checked_positions: requested.to_vec(),
        mismatches,
        inconsistency_rate,
        passed: inconsistency_rate <= t.config.inconsistency_threshold,
    })
}

/// Each participant recovers the other's operation on every encoding pair
/// from TP's published initial state and announced outcome.
pub fn deduce_comparison(t: &Transcript) -> Result<Verdict> {
    let mut bob_equal = true;
    let mut charlie_equal = true;
    for rec in t.pairs.iter().filter(|r| r.role == Role::Encoding) {
        let pos = rec.shuffled_position.unwrap_or(rec.original_index);
        let announced = rec.tp_outcome_announced.ok_or(Error::MissingAnnouncement(pos))?;
        let initial = *t
            .tp_initial_published
            .get(&rec.original_index)
            .ok_or(Error::MissingAnnouncement(pos))?;
        let xor = deduce_op_xor(initial, announced);
        bob_equal &= rec.op_b ^ xor == rec.op_b;
        charlie_equal &= rec.op_c ^ xor == rec.op_c;
    }
    assert_eq!(bob_equal, charlie_equal, "participants disagree on the comparison");
    Ok(if bob_equal { Verdict::Equal } else { Verdict::Unequal })
}

/// Run one full protocol instance. Aborts are reported as verdicts; only an
/// invalid config is an error.
pub fn run_protocol(config: &ProtocolConfig) -> Result<Transcript> {
    config.validate()?;
    let seed = config.seed;
    let mut rng_tp = stream(seed, STREAM_TP);
    let mut rng_b = stream(seed, STREAM_BOB);
    let mut rng_c = stream(seed, STREAM_CHARLIE);
    let mut shared = stream(seed, STREAM_SHARED);
    let mut rng_eve = stream(seed, STREAM_EVE);
    let mut nature = stream(seed, STREAM_NATURE);

    let key = HashKey(config.hash_key.unwrap_or_else(|| shared.random()));
    let l = DisarrangeSecret(config.disarrange_secret.unwrap_or_else(|| shared.random()));
    let hash_len = config.hash_len;
    let digest_x = key.digest(config.x.as_bytes(), hash_len)?;
    let digest_y = key.digest(config.y.as_bytes(), hash_len)?;
    let behavior = config.behavior();
    let eve = config.eve();
    let d = config.decoy_count_per_channel;

    let Prepared { pairs, mut lab, payload_b, payload_c, decoys } = tp_prepare(config, &mut rng_tp);
    let tp_initial: Vec<BellCode> = pairs.iter().map(|p| p.initial).collect();
    let mut flight: Vec<DecoyState> = decoys.iter().map(|r| r.prepared).collect();

    let mut t = Transcript {
        config: config.clone(),
        pairs,
        decoys,
        tp_preannouncement: BTreeMap::new(),
        tp_initial_published: BTreeMap::new(),
        improved_sampling_ops_published: None,
        decoy_check_results: BTreeMap::new(),
        sampling_check: None,
        // overwritten below
        participant_verdict: Verdict::AbortEavesdropper,
        tp_inference: TpInference::Unknown,
        ground_truth_equal: config.x == config.y,
        hash_equal: digest_x == digest_y,
    };

    let verdict = 'run: {
        // TP → Bob, TP → Charlie, then the decoy check on arrival.
        {
            let mut wire = Wire { eve: &eve, lab: &mut lab, pairs: &mut t.pairs, flight: &mut flight };
            wire.transmit(Channel::TpToB, &payload_b, &mut rng_eve);
            wire.transmit(Channel::TpToC, &payload_c, &mut rng_eve);
        }
        if !channel_checks(&mut t, &flight, [Channel::TpToB, Channel::TpToC], &mut nature)? {
            break 'run Verdict::AbortEavesdropper;
        }

        participant_encode(&digest_x, &mut t.pairs, Side::B, hash_len)?;
        participant_encode(&digest_y, &mut t.pairs, Side::C, hash_len)?;
        let published = if config.variant == Variant::Improved {
            let ub = improved_sampling_ops(&mut t.pairs, config.variant, Side::B, &mut rng_b)?;
            let uc = improved_sampling_ops(&mut t.pairs, config.variant, Side::C, &mut rng_c)?;
            Some(
                ub.iter()
                    .map(|(&i, &op_b)| (i, PublishedOps { op_b, op_c: uc[&i] }))
                    .collect::<BTreeMap<_, _>>(),
            )
        } else {
            None
        };
        for rec in &t.pairs {
            let pair = &mut lab[rec.original_index];
            pair.apply(rec.op_b, Side::B);
            pair.apply(rec.op_c, Side::C);
        }

        // Bob and Charlie each derive the arrangement from l on their own.
        let roles: Vec<Role> = t.pairs.iter().map(|p| p.role).collect();
        let order_b = disarrangement_order(l, &roles)?;
        let order_c = disarrangement_order(l, &roles)?;
        assert_eq!(order_b, order_c, "pair correspondence lost after disarrangement");
        let order = disarrange(&mut t.pairs, l)?;
        assert_eq!(order, order_b);

        t.tp_preannouncement = t
            .pairs
            .iter()
            .filter(|p| p.role == Role::Sampling)
            .map(|p| (p.original_index, tp_initial[p.original_index]))
            .collect();

        // Return trip with fresh decoys from each participant.
        let first_return_decoy = t.decoys.len();
        let ret_b = interleave_decoys(&order_b, Channel::BToTp, d, &mut t.decoys, &mut rng_b);
        let ret_c = interleave_decoys(&order_c, Channel::CToTp, d, &mut t.decoys, &mut rng_c);
        flight.extend(t.decoys[first_return_decoy..].iter().map(|r| r.prepared));
        {
            let mut wire = Wire { eve: &eve, lab: &mut lab, pairs: &mut t.pairs, flight: &mut flight };
            wire.transmit(Channel::BToTp, &ret_b, &mut rng_eve);
            wire.transmit(Channel::CToTp, &ret_c, &mut rng_eve);
        }
        if !channel_checks(&mut t, &flight, [Channel::BToTp, Channel::CToTp], &mut nature)? {
            break 'run Verdict::AbortEavesdropper;
        }

        // The random sampling operations are public before TP announces anything.
        t.improved_sampling_ops_published = published;

        let received: Vec<Pair> = order_b.iter().map(|&i| lab[i]).collect();
        let (measured, announced) = tp_measure_and_announce(&received, &behavior, &mut nature);
        for (pos, &i) in order_b.iter().enumerate() {
            t.pairs[i].tp_outcome_true = Some(measured[pos]);
        }
        t.tp_inference = tp_infer_result(&measured, &behavior, config.variant);

        let sampling_positions: Vec<usize> = (0..order_b.len())
            .filter(|&pos| t.pairs[order_b[pos]].role == Role::Sampling)
            .collect();
        let reveal = sampling_reveal_count(config);
        let mut requested: Vec<usize> = sample(&mut shared, sampling_positions.len(), reveal)
            .iter()
            .map(|k| sampling_positions[k])
            .collect();
        requested.sort_unstable();
        for &pos in &requested {
            t.pairs[order_b[pos]].tp_outcome_announced = Some(announced[pos]);
        }
        let check = verify_sampling(&t, &requested)?;
        let passed = check.passed;
        t.sampling_check = Some(check);
        if !passed {
            break 'run Verdict::AbortTpCheating;
        }

        for pos in 0..order_b.len() {
            let i = order_b[pos];
            if t.pairs[i].role == Role::Encoding {
                t.tp_initial_published.insert(i, tp_initial[i]);
                t.pairs[i].tp_outcome_announced = Some(announced[pos]);
            }
        }
        deduce_comparison(&t)?
    };
    t.participant_verdict = verdict;
    Ok(t)
}

fn channel_checks<R: Rng + ?Sized>(
    t: &mut Transcript,
    flight: &[DecoyState],
    channels: [Channel; 2],
    rng: &mut R,
) -> Result<bool> {
    let mut ok = true;
    for ch in channels {
        measure_decoys(ch, &mut t.decoys, flight, rng);
        let check = check_decoys(
            t.decoys.iter().filter(|r| r.channel == ch),
            t.config.decoy_threshold,
        )?;
        ok &= check.passed;
        t.decoy_check_results.insert(ch, check);
    }
    Ok(ok)
}
