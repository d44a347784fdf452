use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hash bit list is empty")]
    EmptyHashBits,

    #[error("hash length must be at least 1")]
    ZeroHashLen,

    #[error("cannot pick {n_sampling} sampling positions out of {n_total}")]
    TooManySampling { n_total: usize, n_sampling: usize },

    #[error("invalid protocol config: {0}")]
    InvalidConfig(String),

    #[error("digest has {digest} bits but the run is configured for {expected}")]
    DigestLength { digest: usize, expected: usize },

    #[error("{needed} encoding pairs needed but only {available} pairs present")]
    PairCount { needed: usize, available: usize },

    #[error("sampling-pair randomization is only defined for the improved variant")]
    NotImprovedVariant,

    #[error("decoy at position {position} on channel {channel} was never measured")]
    UnmeasuredDecoy { channel: String, position: usize },

    #[error("no announcement for position {0}")]
    MissingAnnouncement(usize),

    #[error("dense oracle found no Bell projection with unit overlap (best {best:.12})")]
    OracleProjection { best: f64 },

    #[error("prediction comparison needs at least 30 trials, got {0}")]
    TooFewTrials(u64),

    #[error("fixture line {line}: {reason}")]
    Fixture { line: usize, reason: String },
}
