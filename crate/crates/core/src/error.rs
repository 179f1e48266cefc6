use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rule number {0} does not fit in 32 bits")]
    RuleOutOfRange(u64),
    #[error("correlation-immunity order {0} outside 1..=5")]
    InvalidOrder(u32),
    #[error("ring of {0} cells is smaller than the 5-cell neighborhood")]
    RingTooSmall(usize),
    #[error("invalid PRNG configuration: {0}")]
    InvalidPrngConfig(String),
    #[error("invalid seed: {0}")]
    InvalidSeed(String),
    #[error("expected a block of {expected} bits, got {actual}")]
    BlockLength { expected: usize, actual: usize },
    #[error("stream of {actual} bits is too short (need at least {min})")]
    StreamTooShort { min: usize, actual: usize },
    #[error("affine multiplier {0} is even, layer would not be bijective")]
    EvenMultiplier(u32),
    #[error("value {value} out of range for a {bits}-bit S-box")]
    ValueOutOfRange { value: u64, bits: u32 },
    #[error("table is not a permutation: {0}")]
    NotPermutation(String),
    #[error("unsupported S-box width {0}")]
    UnsupportedWidth(u32),
    #[error("modulus {0:#x} is not an irreducible polynomial of degree {1}")]
    ReducibleModulus(u64, u32),
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("missing checkpoint {0}")]
    MissingCheckpoint(PathBuf),
    #[error("corrupt checkpoint {path}: {reason}")]
    CorruptCheckpoint { path: PathBuf, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid shard {index} of {count}")]
    InvalidShard { index: usize, count: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
