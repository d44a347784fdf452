//! Frozen test vectors for the keyed hash and the seeded shuffle.
//!
//! Fixture files are plain text, one vector per line, `#` for comments:
//!
//! - hash vectors: `key_hex msg_hex hash_len digest_hex` (`-` for an empty message)
//! - permutation vectors: `l_hex n_total n_sampling p0,p1,…` (`-` for none)

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hashing::{keyed_hash, sampling_positions, DisarrangeSecret, HashKey};

pub const HASH_VECTORS: &str = include_str!("../fixtures/hash_vectors.txt");
pub const PERMUTATION_VECTORS: &str = include_str!("../fixtures/permutation_vectors.txt");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashVector {
    pub key: HashKey,
    pub msg: Vec<u8>,
    pub hash_len: usize,
    pub digest_hex: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationVector {
    pub l: DisarrangeSecret,
    pub n_total: usize,
    pub n_sampling: usize,
    pub positions: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VectorReport {
    pub hash_vectors: usize,
    pub hash_mismatches: Vec<usize>,
    pub permutation_vectors: usize,
    pub permutation_mismatches: Vec<usize>,
    pub ok: bool,
}

fn fixture_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Fixture { line, reason: reason.into() }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split_whitespace().collect()))
}

fn parse_u64_hex(line: usize, s: &str) -> Result<u64> {
    u64::from_str_radix(s, 16).map_err(|e| fixture_err(line, format!("bad hex {s:?}: {e}")))
}

fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.parse().map_err(|e| fixture_err(line, format!("bad integer {s:?}: {e}")))
}

fn parse_bytes_hex(line: usize, s: &str) -> Result<Vec<u8>> {
    if s == "-" {
        return Ok(Vec::new());
    }
    if !s.len().is_multiple_of(2) {
        return Err(fixture_err(line, "odd-length hex message"));
    }
    (0..s.len())
        .step_by(2)
        .map(|i| {
            u8::from_str_radix(&s[i..i + 2], 16)
                .map_err(|e| fixture_err(line, format!("bad hex byte: {e}")))
        })
        .collect()
}

pub fn parse_hash_vectors(text: &str) -> Result<Vec<(usize, HashVector)>> {
    data_lines(text)
        .map(|(line, f)| {
            let [key, msg, len, digest] = f[..] else {
                return Err(fixture_err(line, "expected 4 fields"));
            };
            Ok((
                line,
                HashVector {
                    key: HashKey(parse_u64_hex(line, key)?),
                    msg: parse_bytes_hex(line, msg)?,
                    hash_len: parse_usize(line, len)?,
                    digest_hex: digest.to_ascii_lowercase(),
                },
            ))
        })
        .collect()
}

pub fn parse_permutation_vectors(text: &str) -> Result<Vec<(usize, PermutationVector)>> {
    data_lines(text)
        .map(|(line, f)| {
            let [l, n, k, pos] = f[..] else {
                return Err(fixture_err(line, "expected 4 fields"));
            };
            let positions = if pos == "-" {
                Vec::new()
            } else {
                pos.split(',').map(|p| parse_usize(line, p)).collect::<Result<_>>()?
            };
            Ok((
                line,
                PermutationVector {
                    l: DisarrangeSecret(parse_u64_hex(line, l)?),
                    n_total: parse_usize(line, n)?,
                    n_sampling: parse_usize(line, k)?,
                    positions,
                },
            ))
        })
        .collect()
}

/// Recompute every vector and report the fixture lines that disagree.
pub fn verify(hash_text: &str, perm_text: &str) -> Result<VectorReport> {
    let hashes = parse_hash_vectors(hash_text)?;
    let perms = parse_permutation_vectors(perm_text)?;
    let mut hash_mismatches = Vec::new();
    for (line, v) in &hashes {
        let ok = keyed_hash(v.key, &v.msg, v.hash_len)
            .map(|d| d.to_hex() == v.digest_hex)
            .unwrap_or(false);
        if !ok {
            hash_mismatches.push(*line);
        }
    }
    let mut permutation_mismatches = Vec::new();
    for (line, v) in &perms {
        let ok = sampling_positions(v.l, v.n_total, v.n_sampling)
            .map(|p| p == v.positions)
            .unwrap_or(false);
        if !ok {
            permutation_mismatches.push(*line);
        }
    }
    let ok = hash_mismatches.is_empty() && permutation_mismatches.is_empty();
    Ok(VectorReport {
        hash_vectors: hashes.len(),
        hash_mismatches,
        permutation_vectors: perms.len(),
        permutation_mismatches,
        ok,
    })
}

pub fn verify_builtin() -> Result<VectorReport> {
    verify(HASH_VECTORS, PERMUTATION_VECTORS)
}
