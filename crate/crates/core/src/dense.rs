//! Dense state-vector oracle used to cross-check the symbolic backend.
//!
//! Two-qubit vectors use basis order `|00⟩, |01⟩, |10⟩, |11⟩` with Bob's qubit
//! as the most significant one. Matrices are built straight from the four
//! encoding unitaries, independently of the bit tricks in [`crate::quantum`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::{Basis, BasisState, BellCode, Pair, PairState, PauliOp};

/// Amplitude tolerance for oracle comparisons.
pub const TOLERANCE: f64 = 1e-9;

type Mat2 = [[Complex64; 2]; 2];
type Mat4 = [[Complex64; 4]; 4];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenseVec(pub [Complex64; 4]);

impl DenseVec {
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &DenseVec) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, k: f64) -> DenseVec {
        DenseVec(self.0.map(|a| a * k))
    }

    pub fn approx_eq(&self, other: &DenseVec) -> bool {
        self.0
            .iter()
            .zip(other.0.iter())
            .all(|(a, b)| (a - b).norm() <= TOLERANCE)
    }

    /// Equality up to a global phase.
    pub fn approx_eq_up_to_phase(&self, other: &DenseVec) -> bool {
        (self.inner(other).norm() - 1.0).abs() <= TOLERANCE
            && (self.norm_sqr() - 1.0).abs() <= TOLERANCE
            && (other.norm_sqr() - 1.0).abs() <= TOLERANCE
    }
}

/// The matrix of each encoding unitary:
/// `I`, `σz = |0⟩⟨0| − |1⟩⟨1|`, `σx = |1⟩⟨0| + |0⟩⟨1|`, `iσy = |0⟩⟨1| − |1⟩⟨0|`.
pub fn pauli_matrix(op: PauliOp) -> Mat2 {
    let (o, l) = (c(0.0), c(1.0));
    match op.code() {
        0b00 => [[l, o], [o, l]],
        0b01 => [[l, o], [o, -l]],
        0b10 => [[o, l], [l, o]],
        _ => [[o, l], [-l, o]],
    }
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[c(0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn mat_vec(m: &Mat4, v: &DenseVec) -> DenseVec {
    let mut out = [c(0.0); 4];
    for (i, row) in m.iter().enumerate() {
        out[i] = row.iter().zip(v.0.iter()).map(|(a, b)| a * b).sum();
    }
    DenseVec(out)
}

/// Textbook amplitudes: `Φ± = (|00⟩ ± |11⟩)/√2`, `Ψ± = (|01⟩ ± |10⟩)/√2`.
pub fn dense_bell_vector(bell: BellCode) -> DenseVec {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (o, p, m) = (c(0.0), c(h), c(-h));
    DenseVec(match bell {
        BellCode::PhiPlus => [p, o, o, p],
        BellCode::PhiMinus => [p, o, o, m],
        BellCode::PsiPlus => [o, p, p, o],
        BellCode::PsiMinus => [o, p, m, o],
    })
}

pub fn dense_pair_vector(state: PairState) -> DenseVec {
    dense_bell_vector(state.bell).scale(state.sign as f64)
}

pub fn dense_qubit(state: BasisState) -> [Complex64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match (state.basis, state.value) {
        (Basis::Z, false) => [c(1.0), c(0.0)],
        (Basis::Z, true) => [c(0.0), c(1.0)],
        (Basis::X, false) => [c(h), c(h)],
        (Basis::X, true) => [c(h), c(-h)],
    }
}

pub fn dense_product(b: BasisState, cq: BasisState) -> DenseVec {
    let (x, y) = (dense_qubit(b), dense_qubit(cq));
    DenseVec([x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]])
}

/// Born-rule Bell-measurement probabilities, indexed by `BellCode::code()`.
pub fn dense_bell_probabilities(v: &DenseVec) -> [f64; 4] {
    BellCode::ALL.map(|b| dense_bell_vector(b).inner(v).norm_sqr())
}

pub fn dense_pair_probabilities(pair: &Pair) -> [f64; 4] {
    match *pair {
        Pair::Entangled(s) => dense_bell_probabilities(&dense_pair_vector(s)),
        Pair::Product { b, c } => dense_bell_probabilities(&dense_product(b, c)),
    }
}

/// Project onto the Bell basis and return the unique code with unit overlap.
pub fn dense_bell_project(v: &DenseVec) -> Result<BellCode> {
    let mut best = 0.0f64;
    for bell in BellCode::ALL {
        let overlap = dense_bell_vector(bell).inner(v).norm();
        if overlap >= 1.0 - TOLERANCE {
            return Ok(bell);
        }
        best = best.max(overlap);
    }
    Err(Error::OracleProjection { best })
}

/// Apply `op_b ⊗ op_c` to a Bell state and project the result.
pub fn dense_apply_and_project(bell: BellCode, op_b: PauliOp, op_c: PauliOp) -> Result<BellCode> {
    dense_bell_project(&dense_apply(bell, op_b, op_c))
}

pub fn dense_apply(bell: BellCode, op_b: PauliOp, op_c: PauliOp) -> DenseVec {
    let m = kron(&pauli_matrix(op_b), &pauli_matrix(op_c));
    mat_vec(&m, &dense_bell_vector(bell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{apply_pauli_to_bell, Side};

    #[test]
    fn bell_vector_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = dense_bell_vector(BellCode::PhiPlus);
        assert!((phi.0[0].re - h).abs() < 1e-15 && (phi.0[3].re - h).abs() < 1e-15);
        let psi = dense_bell_vector(BellCode::PsiMinus);
        assert!((psi.0[1].re - h).abs() < 1e-15 && (psi.0[2].re + h).abs() < 1e-15);
        for b in BellCode::ALL {
            assert!((dense_bell_vector(b).norm_sqr() - 1.0).abs() < 1e-12);
            assert_eq!(dense_bell_project(&dense_bell_vector(b)).unwrap(), b);
        }
    }

    #[test]
    fn apply_and_project_examples() {
        use BellCode::*;
        assert_eq!(dense_apply_and_project(PhiPlus, PauliOp::I, PauliOp::I).unwrap(), PhiPlus);
        assert_eq!(dense_apply_and_project(PhiPlus, PauliOp::X, PauliOp::I).unwrap(), PsiPlus);
        assert_eq!(dense_apply_and_project(PhiPlus, PauliOp::Z, PauliOp::I).unwrap(), PhiMinus);
        assert_eq!(dense_apply_and_project(PsiPlus, PauliOp::I, PauliOp::IY).unwrap(), PhiMinus);
        assert_eq!(dense_apply_and_project(PhiPlus, PauliOp::IY, PauliOp::I).unwrap(), PsiMinus);
    }

    #[test]
    fn projection_fails_on_non_bell_vector() {
        let v = dense_product(
            BasisState::new(Basis::Z, false),
            BasisState::new(Basis::Z, false),
        );
        assert!(matches!(dense_bell_project(&v), Err(Error::OracleProjection { .. })));
    }

    #[test]
    fn symbolic_sign_matches_dense_amplitudes_exactly() {
        for bell in BellCode::ALL {
            for a in PauliOp::ALL {
                for b in PauliOp::ALL {
                    let s = apply_pauli_to_bell(
                        apply_pauli_to_bell(PairState::new(bell), a, Side::B),
                        b,
                        Side::C,
                    );
                    let dense = dense_apply(bell, a, b);
                    assert!(dense_pair_vector(s).approx_eq(&dense), "{bell} {a} {b}");
                    // and the order of the two sides does not matter
                    let t = apply_pauli_to_bell(
                        apply_pauli_to_bell(PairState::new(bell), b, Side::C),
                        a,
                        Side::B,
                    );
                    assert!(dense_pair_vector(t).approx_eq(&dense));
                }
            }
        }
    }
}
