//! Desk-scale simulator for Bell-state quantum private comparison with a
//! dishonest third party.
//!
//! - [`quantum`]: Bell-pair and decoy algebra (symbolic Pauli frame)
//! - [`dense`]: state-vector oracle for the symbolic backend
//! - [`hashing`]: keyed toy hash and the seeded shuffle behind disarrangement
//! - [`protocol`]: the full run, original and improved variants
//! - [`adversary`]: same-initial-states third party and intercept-resend eavesdropper
//! - [`harness`]: seeded Monte-Carlo trials and closed-form predictions

pub mod adversary;
pub mod dense;
pub mod error;
pub mod harness;
pub mod hashing;
pub mod protocol;
pub mod quantum;
pub mod vectors;

pub use error::{Error, Result};
