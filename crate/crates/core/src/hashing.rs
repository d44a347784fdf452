//! Keyed toy hash shared by the two participants, and the seeded shuffle that
//! turns the disarrangement secret into sampling positions.
//!
//! Both are built on the splitmix64 finalizer and are bit-exact with the
//! reference script in `scripts/reference_vectors.py`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One splitmix64 step: returns `(output, next_state)`.
#[inline]
pub fn mix64(s: u64) -> (u64, u64) {
    let s = s.wrapping_add(GOLDEN_GAMMA);
    let mut z = s;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (z ^ (z >> 31), s)
}

/// Output stream of repeated [`mix64`] calls.
#[derive(Clone, Debug)]
pub struct MixStream {
    state: u64,
}

impl MixStream {
    pub fn new(seed: u64) -> Self {
        MixStream { state: seed }
    }
}

impl Iterator for MixStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let (z, s) = mix64(self.state);
        self.state = s;
        Some(z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HashKey(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DisarrangeSecret(pub u64);

/// Digest bits written most significant first: `bits[0]` is `x'_{M-1}` and the
/// last element is `x'_0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HashDigest {
    bits: Vec<bool>,
}

impl HashDigest {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::ZeroHashLen);
        }
        Ok(HashDigest { bits })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Hex of the bits packed MSB first, zero padded to a whole nibble.
    pub fn to_hex(&self) -> String {
        self.bits
            .chunks(4)
            .map(|chunk| {
                let v = chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | (b as u8) << (3 - i));
                char::from_digit(v as u32, 16).unwrap()
            })
            .collect()
    }
}

impl fmt::Display for HashDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Anything that can stand in for the shared secret hash.
pub trait SecretHash {
    fn digest(&self, msg: &[u8], hash_len: usize) -> Result<HashDigest>;
}

impl SecretHash for HashKey {
    fn digest(&self, msg: &[u8], hash_len: usize) -> Result<HashDigest> {
        keyed_hash(*self, msg, hash_len)
    }
}

/// Absorb each byte (tagged with its position mod 251) through `mix64`, then
/// squeeze big-endian 64-bit words from the resulting stream.
pub fn keyed_hash(key: HashKey, msg: &[u8], hash_len: usize) -> Result<HashDigest> {
    if hash_len == 0 {
        return Err(Error::ZeroHashLen);
    }
    let state = msg.iter().enumerate().fold(key.0, |state, (i, &b)| {
        let tweak = b as u64 + 0x100 * (i % 251) as u64;
        mix64(state ^ tweak).0
    });
    let bits = MixStream::new(state)
        .take(hash_len.div_ceil(64))
        .flat_map(|word| (0..64).rev().map(move |k| (word >> k) & 1 == 1))
        .take(hash_len)
        .collect();
    Ok(HashDigest { bits })
}

/// Fisher–Yates shuffle of `0..n`, swapping index `i` with `next mod (i + 1)`.
pub fn shuffled_indices(l: DisarrangeSecret, n: usize) -> Vec<usize> {
    let mut arr: Vec<usize> = (0..n).collect();
    let mut stream = MixStream::new(l.0);
    for i in (1..n).rev() {
        let j = (stream.next().unwrap() % (i as u64 + 1)) as usize;
        arr.swap(i, j);
    }
    arr
}

/// First `n_sampling` entries of the shuffle, in shuffle order.
pub fn sampling_positions(
    l: DisarrangeSecret,
    n_total: usize,
    n_sampling: usize,
) -> Result<Vec<usize>> {
    if n_sampling > n_total {
        return Err(Error::TooManySampling { n_total, n_sampling });
    }
    let mut all = shuffled_indices(l, n_total);
    all.truncate(n_sampling);
    Ok(all)
}
