//! Useful proof of work: a Nakamoto hash chain whose nonce search doubles
//! as a node-bound file sealing algorithm, plus the proof-of-replication
//! challenge protocol built on the sealed replicas.

pub mod encoding;
pub mod hash;
pub mod merkle;
pub mod porep;
pub mod pow;
pub mod serde_hex;

pub use hash::{hash, hash_parts, HashMeter, H256, HASH_ALG_TAG};
