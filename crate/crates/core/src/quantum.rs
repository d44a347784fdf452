//! Symbolic algebra of Bell pairs, the four encoding unitaries and the
//! single-photon decoy states.
//!
//! A Bell state is labelled by two bits `(parity, phase)` and an encoding
//! unitary by two bits `(x, z)` so that `U_{xz} = Z^z X^x`. With this labelling
//! the Bell state with code `c` is exactly `(U_c ⊗ I)|Φ⁺⟩`, and applying `U_a` to
//! either half moves `c` to `c ⊕ a` up to a global sign. The sign is tracked so
//! that the dense oracle in [`crate::dense`] can check amplitudes exactly.

use std::fmt;
use std::ops::BitXor;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of one of the four Bell states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellCode {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellCode {
    pub const ALL: [BellCode; 4] = [
        BellCode::PhiPlus,
        BellCode::PhiMinus,
        BellCode::PsiPlus,
        BellCode::PsiMinus,
    ];

    pub fn from_bits(parity: bool, phase: bool) -> Self {
        match (parity, phase) {
            (false, false) => BellCode::PhiPlus,
            (false, true) => BellCode::PhiMinus,
            (true, false) => BellCode::PsiPlus,
            (true, true) => BellCode::PsiMinus,
        }
    }

    /// `parity << 1 | phase`.
    pub fn from_code(code: u8) -> Self {
        Self::from_bits(code & 0b10 != 0, code & 0b01 != 0)
    }

    pub fn code(self) -> u8 {
        (self.parity() as u8) << 1 | self.phase() as u8
    }

    /// 0 for the Φ family (|00⟩±|11⟩), 1 for the Ψ family (|01⟩±|10⟩).
    pub fn parity(self) -> bool {
        matches!(self, BellCode::PsiPlus | BellCode::PsiMinus)
    }

    /// 0 for "+", 1 for "−".
    pub fn phase(self) -> bool {
        matches!(self, BellCode::PhiMinus | BellCode::PsiMinus)
    }
}

impl BitXor<PauliOp> for BellCode {
    type Output = BellCode;

    fn bitxor(self, op: PauliOp) -> BellCode {
        BellCode::from_code(self.code() ^ op.code())
    }
}

impl fmt::Display for BellCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellCode::PhiPlus => "Φ+",
            BellCode::PhiMinus => "Φ-",
            BellCode::PsiPlus => "Ψ+",
            BellCode::PsiMinus => "Ψ-",
        })
    }
}

/// One of the four encoding unitaries, identified by its two-bit code:
/// `00 = I`, `01 = σz`, `10 = σx`, `11 = iσy`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOp(u8);

impl PauliOp {
    pub const I: PauliOp = PauliOp(0b00);
    pub const Z: PauliOp = PauliOp(0b01);
    pub const X: PauliOp = PauliOp(0b10);
    pub const IY: PauliOp = PauliOp(0b11);

    pub const ALL: [PauliOp; 4] = [PauliOp::I, PauliOp::Z, PauliOp::X, PauliOp::IY];

    /// Only the low two bits of `code` are used.
    pub fn from_code(code: u8) -> Self {
        PauliOp(code & 0b11)
    }

    pub fn from_bits(first: bool, second: bool) -> Self {
        PauliOp((first as u8) << 1 | second as u8)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    /// First code bit: the bit-flip (σx) component.
    pub fn x_bit(self) -> bool {
        self.0 & 0b10 != 0
    }

    /// Second code bit: the phase-flip (σz) component.
    pub fn z_bit(self) -> bool {
        self.0 & 0b01 != 0
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        PauliOp(rng.random_range(0..4u8))
    }
}

impl BitXor for PauliOp {
    type Output = PauliOp;

    fn bitxor(self, rhs: PauliOp) -> PauliOp {
        PauliOp(self.0 ^ rhs.0)
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U{:02b}", self.0)
    }
}

impl Serialize for PauliOp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:02b}", self.0))
    }
}

impl<'de> Deserialize<'de> for PauliOp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "00" => Ok(PauliOp::I),
            "01" => Ok(PauliOp::Z),
            "10" => Ok(PauliOp::X),
            "11" => Ok(PauliOp::IY),
            other => Err(serde::de::Error::custom(format!("bad Pauli code {other:?}"))),
        }
    }
}

/// Which half of an EPR pair: the photon sent to Bob or the one sent to Charlie.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    B,
    C,
}

/// Joint state of an intact EPR pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairState {
    pub bell: BellCode,
    /// Global phase sign; never observable.
    pub sign: i8,
}

impl PairState {
    pub fn new(bell: BellCode) -> Self {
        PairState { bell, sign: 1 }
    }

    pub fn apply(self, op: PauliOp, side: Side) -> Self {
        apply_pauli_to_bell(self, op, side)
    }
}

impl From<BellCode> for PairState {
    fn from(bell: BellCode) -> Self {
        PairState::new(bell)
    }
}

/// Apply `op` to one half of the pair.
///
/// `(U_a ⊗ I)(U_c ⊗ I)|Φ⁺⟩` picks up `(-1)^{a_x c_z}` from commuting X past Z;
/// on the C side `(I ⊗ U_a)|Φ⁺⟩ = (U_aᵀ ⊗ I)|Φ⁺⟩` adds the transpose sign `(-1)^{a_x a_z}`
/// and the commutation sign `(-1)^{c_x a_z}`.
pub fn apply_pauli_to_bell(state: PairState, op: PauliOp, side: Side) -> PairState {
    let c = state.bell;
    let flip = match side {
        Side::B => op.x_bit() & c.phase(),
        Side::C => (op.x_bit() & op.z_bit()) ^ (c.parity() & op.z_bit()),
    };
    PairState {
        bell: c ^ op,
        sign: if flip { -state.sign } else { state.sign },
    }
}

/// Bell-basis measurement of an intact pair; deterministic in the noiseless model.
pub fn measure_bell(state: PairState) -> BellCode {
    state.bell
}

/// The combined operation that takes `initial` to `final_`, i.e. `opB ⊕ opC`.
pub fn deduce_op_xor(initial: BellCode, final_: BellCode) -> PauliOp {
    PauliOp::from_code(initial.code() ^ final_.code())
}

/// Turn a hash digest into the per-photon encoding operations.
///
/// `hash_bits` is written most-significant first, `(x'_{M-1}, …, x'_0)`, so
/// `x'_0` is the last element. Odd lengths get one leading zero bit. Operation
/// `k` has code `(x'_{2k}, x'_{2k+1})`.
pub fn encode_bits_to_ops(hash_bits: &[bool]) -> Result<Vec<PauliOp>> {
    if hash_bits.is_empty() {
        return Err(Error::EmptyHashBits);
    }
    let mut padded = Vec::with_capacity(hash_bits.len() + 1);
    if hash_bits.len() % 2 == 1 {
        padded.push(false);
    }
    padded.extend_from_slice(hash_bits);
    let len = padded.len();
    // x'_i lives at padded[len - 1 - i]
    let bit = |i: usize| padded[len - 1 - i];
    Ok((0..len / 2)
        .map(|k| PauliOp::from_bits(bit(2 * k), bit(2 * k + 1)))
        .collect())
}

/// Number of encoding photons needed for a hash of `hash_len` bits.
pub fn encoding_pair_count(hash_len: usize) -> usize {
    hash_len.div_ceil(2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) {
            Basis::X
        } else {
            Basis::Z
        }
    }
}

/// A single-qubit eigenstate of Z or X: `Z0=|0⟩`, `Z1=|1⟩`, `X0=|+⟩`, `X1=|−⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState {
    pub basis: Basis,
    pub value: bool,
}

/// Decoy photons are single-qubit basis states.
pub type DecoyState = BasisState;

impl BasisState {
    pub const ALL: [BasisState; 4] = [
        BasisState { basis: Basis::Z, value: false },
        BasisState { basis: Basis::Z, value: true },
        BasisState { basis: Basis::X, value: false },
        BasisState { basis: Basis::X, value: true },
    ];

    pub fn new(basis: Basis, value: bool) -> Self {
        BasisState { basis, value }
    }

    /// Paulis map basis states to basis states of the same basis (up to sign).
    pub fn apply(self, op: PauliOp) -> Self {
        let flips = match self.basis {
            Basis::Z => op.x_bit(),
            Basis::X => op.z_bit(),
        };
        BasisState {
            basis: self.basis,
            value: self.value ^ flips,
        }
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match (self.basis, self.value) {
            (Basis::Z, false) => "|0>",
            (Basis::Z, true) => "|1>",
            (Basis::X, false) => "|+>",
            (Basis::X, true) => "|->",
        })
    }
}

pub fn decoy_prepare<R: Rng + ?Sized>(rng: &mut R) -> DecoyState {
    BasisState::ALL[rng.random_range(0..4)]
}

/// Measure a basis state. Returns the outcome and the post-measurement state.
pub fn decoy_measure<R: Rng + ?Sized>(
    state: DecoyState,
    basis: Basis,
    rng: &mut R,
) -> (bool, DecoyState) {
    let value = if basis == state.basis {
        state.value
    } else {
        rng.random_bool(0.5)
    };
    (value, BasisState::new(basis, value))
}

/// Everything a pair can be in this model: still entangled, or collapsed to a
/// product of basis states after an eavesdropper measured one of its halves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pair {
    Entangled(PairState),
    Product { b: BasisState, c: BasisState },
}

impl Pair {
    pub fn new(bell: BellCode) -> Self {
        Pair::Entangled(PairState::new(bell))
    }

    pub fn is_entangled(&self) -> bool {
        matches!(self, Pair::Entangled(_))
    }

    pub fn apply(&mut self, op: PauliOp, side: Side) {
        *self = match *self {
            Pair::Entangled(s) => Pair::Entangled(s.apply(op, side)),
            Pair::Product { b, c } => match side {
                Side::B => Pair::Product { b: b.apply(op), c },
                Side::C => Pair::Product { b, c: c.apply(op) },
            },
        };
    }

    /// Single-qubit measurement of one half, collapsing the pair.
    pub fn measure_side<R: Rng + ?Sized>(&mut self, side: Side, basis: Basis, rng: &mut R) -> bool {
        match *self {
            Pair::Entangled(s) => {
                let value = rng.random_bool(0.5);
                // Z outcomes are correlated through parity, X outcomes through phase.
                let partner = value
                    ^ match basis {
                        Basis::Z => s.bell.parity(),
                        Basis::X => s.bell.phase(),
                    };
                let mine = BasisState::new(basis, value);
                let theirs = BasisState::new(basis, partner);
                *self = match side {
                    Side::B => Pair::Product { b: mine, c: theirs },
                    Side::C => Pair::Product { b: theirs, c: mine },
                };
                value
            }
            Pair::Product { b, c } => {
                let target = match side {
                    Side::B => b,
                    Side::C => c,
                };
                let (value, post) = decoy_measure(target, basis, rng);
                *self = match side {
                    Side::B => Pair::Product { b: post, c },
                    Side::C => Pair::Product { b, c: post },
                };
                value
            }
        }
    }

    /// Born-rule probabilities of each Bell outcome, indexed by `BellCode::code()`.
    pub fn bell_distribution(&self) -> [f64; 4] {
        let mut p = [0.0; 4];
        match *self {
            Pair::Entangled(s) => p[s.bell.code() as usize] = 1.0,
            Pair::Product { b, c } => match (b.basis, c.basis) {
                (Basis::Z, Basis::Z) => {
                    let parity = b.value ^ c.value;
                    p[BellCode::from_bits(parity, false).code() as usize] = 0.5;
                    p[BellCode::from_bits(parity, true).code() as usize] = 0.5;
                }
                (Basis::X, Basis::X) => {
                    let phase = b.value ^ c.value;
                    p[BellCode::from_bits(false, phase).code() as usize] = 0.5;
                    p[BellCode::from_bits(true, phase).code() as usize] = 0.5;
                }
                _ => p = [0.25; 4],
            },
        }
        p
    }

    pub fn bell_measure<R: Rng + ?Sized>(&self, rng: &mut R) -> BellCode {
        match *self {
            Pair::Entangled(s) => measure_bell(s),
            Pair::Product { .. } => {
                let p = self.bell_distribution();
                let candidates: Vec<BellCode> = BellCode::ALL
                    .into_iter()
                    .filter(|b| p[b.code() as usize] > 0.0)
                    .collect();
                // every non-zero entry is equal
                candidates[rng.random_range(0..candidates.len())]
            }
        }
    }
}
