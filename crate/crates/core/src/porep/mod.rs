//! Proof of replication over sealed replicas.
//!
//! A provider commits to the Merkle root of its nonce stream. A challenge
//! names `q` random symbol positions and a deadline of `c · q` hash-budget
//! units. An honest provider answers by lookup (no sealing hashes); a
//! provider that kept only the source must re-seal each challenged symbol,
//! paying about `2^L` hashes apiece, and so blows the deadline whenever
//! `c ≪ 2^L`.

pub mod tree;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::codec::{check_symbol, decode};
use crate::encoding::replica::{segment_for, ReplicaFile, Segment};
use crate::encoding::seal::Sealer;
use crate::encoding::symbols::symbols_at;
use crate::encoding::EncodingError;
use crate::hash::{hash, hash_parts, HashMeter, H256};
use crate::merkle::MerklePath;
pub use tree::{verify_nonce_path, NonceTree, PAGE_SIZE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PorepError {
    #[error("replica does not decode to the claimed source")]
    ReplicaSourceMismatch,
    #[error("q must be at least 1")]
    ZeroQ,
    #[error("q = {q} exceeds the {symbols} committed symbols")]
    QTooLarge { q: usize, symbols: u64 },
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicaCommitment {
    pub replica_root: H256,
    pub source_digest: H256,
    #[serde(with = "crate::serde_hex")]
    pub node_id: Vec<u8>,
    pub difficulty: u8,
    pub pad_bits: u8,
    pub symbol_count: u64,
    pub segments: Vec<Segment>,
}

/// Commit to a replica after checking it decodes to `source`.
pub fn commit(replica: &ReplicaFile, source: &[u8]) -> Result<ReplicaCommitment, PorepError> {
    let decoded = match decode(replica, &HashMeter::new()) {
        Ok(d) => d,
        Err(EncodingError::CorruptReplica(_)) => return Err(PorepError::ReplicaSourceMismatch),
        Err(e) => return Err(e.into()),
    };
    if decoded != source {
        return Err(PorepError::ReplicaSourceMismatch);
    }
    Ok(commitment_for(replica, &NonceTree::build(&replica.nonces), hash(source)))
}

/// Commitment from an already-built tree; does not check the source.
pub fn commitment_for(replica: &ReplicaFile, tree: &NonceTree, source_digest: H256) -> ReplicaCommitment {
    ReplicaCommitment {
        replica_root: tree.root(),
        source_digest,
        node_id: replica.node_id.clone(),
        difficulty: replica.difficulty,
        pad_bits: replica.pad_bits,
        symbol_count: replica.symbol_count(),
        segments: replica.segments.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Challenge {
    pub challenge_id: H256,
    pub replica_root: H256,
    /// Distinct positions, ascending.
    pub indices: Vec<u64>,
    pub issued_at: u64,
    /// Hash-budget units the response may spend.
    pub deadline: u64,
}

/// Draw `q` distinct uniform positions from a generator seeded by
/// `(seed, replica_root)`; deadline is `deadline_factor · q`.
pub fn issue_challenge(
    seed: u64,
    commitment: &ReplicaCommitment,
    q: usize,
    deadline_factor: u64,
    issued_at: u64,
) -> Result<Challenge, PorepError> {
    if q == 0 {
        return Err(PorepError::ZeroQ);
    }
    if q as u64 > commitment.symbol_count {
        return Err(PorepError::QTooLarge { q, symbols: commitment.symbol_count });
    }
    let seed_digest = hash_parts(&[b"upw-challenge", &seed.to_le_bytes(), commitment.replica_root.as_bytes()]);
    let mut rng = ChaCha8Rng::from_seed(seed_digest.0);
    let mut indices: Vec<u64> =
        sample(&mut rng, commitment.symbol_count as usize, q).into_iter().map(|i| i as u64).collect();
    indices.sort_unstable();
    let challenge_id = hash_parts(&[seed_digest.as_bytes(), &issued_at.to_le_bytes()]);
    Ok(Challenge {
        challenge_id,
        replica_root: commitment.replica_root,
        indices,
        issued_at,
        deadline: deadline_factor * q as u64,
    })
}

/// What a prover actually keeps.
#[derive(Clone, Debug)]
pub enum ProverStorage {
    HasReplica { replica: ReplicaFile, tree: NonceTree },
    /// Kept the source and the commitment tree but discarded the nonces.
    /// The retained tree is a generous assumption: it lets the cheater
    /// produce valid paths, so only the sealing cost can expose it.
    HasSourceOnly { source: Vec<u8>, commitment: ReplicaCommitment, tree: NonceTree },
    HasNothing,
}

impl ProverStorage {
    pub fn honest(replica: ReplicaFile) -> Self {
        let tree = NonceTree::build(&replica.nonces);
        ProverStorage::HasReplica { replica, tree }
    }

    pub fn source_only(replica: &ReplicaFile, source: Vec<u8>) -> Self {
        let tree = NonceTree::build(&replica.nonces);
        let commitment = commitment_for(replica, &tree, hash(&source));
        ProverStorage::HasSourceOnly { source, commitment, tree }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofEntry {
    pub index: u64,
    pub nonce: u64,
    pub path: MerklePath,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChallengeProof {
    pub challenge_id: H256,
    pub responder: String,
    pub entries: Vec<ProofEntry>,
    /// Sealing hashes spent producing the response (path lookups are free).
    pub hash_ops_spent: u64,
}

/// Answer a challenge from whatever the prover holds. Never errors:
/// dishonesty shows up as cost or as an invalid proof.
pub fn respond(responder: &str, storage: &ProverStorage, challenge: &Challenge) -> ChallengeProof {
    let mut entries = vec![];
    let mut spent = 0;
    match storage {
        ProverStorage::HasReplica { replica, tree } => {
            for &i in &challenge.indices {
                if let (Some(&nonce), Some(path)) = (replica.nonces.get(i as usize), tree.path(i)) {
                    entries.push(ProofEntry { index: i, nonce, path });
                }
            }
        }
        ProverStorage::HasSourceOnly { source, commitment, tree } => {
            let symbols = symbols_at(source, commitment.difficulty, &challenge.indices);
            for (&i, &sym) in challenge.indices.iter().zip(&symbols) {
                let seg = segment_for(&commitment.segments, i);
                let sealer = Sealer::new(&commitment.node_id, &seg.block_hash, commitment.difficulty);
                let Ok((nonce, cost)) = sealer.seal(i, sym) else { continue };
                spent += cost;
                if let Some(path) = tree.path(i) {
                    entries.push(ProofEntry { index: i, nonce, path });
                }
            }
        }
        ProverStorage::HasNothing => {}
    }
    ChallengeProof {
        challenge_id: challenge.challenge_id,
        responder: responder.to_string(),
        entries,
        hash_ops_spent: spent,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum FailReason {
    Empty,
    /// Proof is for another challenge or another replica.
    WrongChallenge,
    /// Proof positions differ from the challenged positions.
    IndexMismatch,
    BadSymbol { index: u64 },
    BadPath { index: u64 },
    DeadlineExceeded { spent: u64, deadline: u64 },
    /// Naive verification: downloaded replica hashes to another root.
    RootMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail(FailReason),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Interactive verification. `original_symbols[k]` is the source symbol at
/// `challenge.indices[k]`.
pub fn verify(
    proof: &ChallengeProof,
    challenge: &Challenge,
    commitment: &ReplicaCommitment,
    original_symbols: &[u16],
    meter: &HashMeter,
) -> Verdict {
    use FailReason::*;
    if proof.entries.is_empty() {
        return Verdict::Fail(Empty);
    }
    if proof.challenge_id != challenge.challenge_id || challenge.replica_root != commitment.replica_root {
        return Verdict::Fail(WrongChallenge);
    }
    if proof.entries.len() != challenge.indices.len()
        || original_symbols.len() != challenge.indices.len()
        || proof.entries.iter().zip(&challenge.indices).any(|(e, i)| e.index != *i)
    {
        return Verdict::Fail(IndexMismatch);
    }
    for (e, &sym) in proof.entries.iter().zip(original_symbols) {
        if !check_symbol(&commitment.node_id, commitment.difficulty, &commitment.segments, e.index, e.nonce, sym, meter) {
            return Verdict::Fail(BadSymbol { index: e.index });
        }
    }
    for e in &proof.entries {
        if !verify_nonce_path(e.nonce, e.index, commitment.symbol_count, &e.path, &commitment.replica_root) {
            return Verdict::Fail(BadPath { index: e.index });
        }
    }
    if proof.hash_ops_spent > challenge.deadline {
        return Verdict::Fail(DeadlineExceeded { spent: proof.hash_ops_spent, deadline: challenge.deadline });
    }
    Verdict::Pass
}

/// Naive verification: rebuild the root from a full replica download.
pub fn verify_naive(replica_bytes: &[u8], commitment: &ReplicaCommitment) -> Verdict {
    match ReplicaFile::from_bytes(replica_bytes) {
        Ok(r) if NonceTree::build(&r.nonces).root() == commitment.replica_root => Verdict::Pass,
        _ => Verdict::Fail(FailReason::RootMismatch),
    }
}
