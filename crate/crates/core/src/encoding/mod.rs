//! Useful-work encoding: the PoW nonce search reused as a slow-to-encode,
//! fast-to-decode file sealing scheme.
//!
//! A source is split into `L`-bit symbols. Symbol `i` is sealed by the
//! smallest nonce `r` such that the last `L` bits of
//! `H(node_id ‖ block_hash ‖ i ‖ r)` equal the symbol. Encoding costs about
//! `2^L` hashes per symbol; decoding costs exactly one.
//!
//! Binding the symbol index into the preimage keeps the per-symbol cost:
//! without it, equal symbols would share a nonce and a `2^L`-entry table
//! would seal any file.

pub mod bench;
pub mod codec;
pub mod params;
pub mod replica;
pub mod seal;
pub mod symbols;
pub mod useful_miner;

use thiserror::Error;

pub use bench::{bench_asymmetry, encode_cost_model, BenchRow};
pub use codec::{check_symbol, decode, decode_bytes, decode_symbols, encode, plan_segments, EncodeStats, FeedEntry};
pub use params::{BindingMode, EncodingParams};
pub use replica::{ReplicaFile, Segment};
pub use seal::Sealer;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodingError {
    #[error("difficulty {0} outside 1..=16")]
    InvalidDifficulty(u8),
    #[error("node id must be non-empty")]
    EmptyNodeId,
    #[error("node id of {0} bytes exceeds 65535")]
    NodeIdTooLong(usize),
    #[error("source is empty")]
    EmptySource,
    #[error("chain feed has no block hash available before symbol 0")]
    EmptyChainFeed,
    #[error("chain feed entries must have non-decreasing start indices")]
    UnorderedChainFeed,
    #[error("no nonce seals symbol {index}")]
    NonceSpaceExhausted { index: u64 },
    #[error("corrupt replica: {0}")]
    CorruptReplica(String),
}
