//! Nakamoto mining loop: increment a nonce until the header hash falls
//! below the target, abandoning the attempt as soon as an interrupt (a new
//! block from elsewhere) is observed.

use std::sync::atomic::{AtomicBool, Ordering};

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::block::{header_commitment, Block, Body};
use super::chain::ChainStore;
use super::header::{BlockHeader, HEADER_LEN, HEADER_VERSION};
use crate::hash::{HashMeter, H256};

/// Polled once before every hash attempt.
pub trait Interrupt {
    fn raised(&self) -> bool;
}

impl Interrupt for AtomicBool {
    fn raised(&self) -> bool {
        self.load(Ordering::Acquire)
    }
}

impl<F: Fn() -> bool> Interrupt for F {
    fn raised(&self) -> bool {
        self()
    }
}

/// An interrupt that never fires.
pub struct Never;

impl Interrupt for Never {
    fn raised(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug)]
pub struct MiningJob {
    pub parent: H256,
    pub records_root: H256,
    pub identity: Vec<u8>,
    /// Supplied by the caller's clock; never read from the wall clock.
    pub timestamp: u64,
    /// Maximum number of hashes to try.
    pub budget: u64,
    /// First nonce tried; workers splitting a nonce range use distinct
    /// `start_nonce` values with a common `nonce_stride`.
    pub start_nonce: u64,
    pub nonce_stride: u64,
}

impl MiningJob {
    pub fn new(parent: H256, body: &Body, timestamp: u64, budget: u64) -> Self {
        MiningJob {
            parent,
            records_root: body.records_root(),
            identity: body.identity.clone(),
            timestamp,
            budget,
            start_nonce: 0,
            nonce_stride: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mined {
    pub header: BlockHeader,
    pub hash: H256,
    /// Hash invocations consumed by this attempt.
    pub hashes: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MineError {
    #[error("parent block {0} is not in the store")]
    UnknownParent(H256),
    #[error("budget zero")]
    ZeroBudget,
    #[error("no qualifying nonce within {hashes} hashes")]
    BudgetExhausted { hashes: u64 },
    #[error("interrupted after {hashes} hashes")]
    Interrupted { hashes: u64 },
}

/// Incremental search state for one header template. Lets a caller
/// interleave mining with other hash work on the same meter.
#[derive(Clone)]
pub struct NonceSearch {
    template: BlockHeader,
    prefix: Sha256,
    next_nonce: u64,
    stride: u64,
    tried: u64,
}

impl NonceSearch {
    pub fn new(template: BlockHeader, start_nonce: u64, stride: u64) -> Self {
        let mut buf = [0u8; HEADER_LEN];
        template.write_prefix(&mut buf);
        let mut prefix = Sha256::new();
        prefix.update(&buf[..HEADER_LEN - 8]);
        NonceSearch { template, prefix, next_nonce: start_nonce, stride: stride.max(1), tried: 0 }
    }

    pub fn tried(&self) -> u64 {
        self.tried
    }

    /// Try one nonce. Returns the sealed header on success.
    pub fn step(&mut self, meter: &HashMeter) -> Option<(BlockHeader, H256)> {
        let nonce = self.next_nonce;
        self.next_nonce = self.next_nonce.wrapping_add(self.stride);
        self.tried += 1;
        meter.add(1);
        let mut h = self.prefix.clone();
        h.update(nonce.to_le_bytes());
        let digest = H256(h.finalize().into());
        if self.template.target().is_met_by(&digest) {
            Some((BlockHeader { nonce, ..self.template }, digest))
        } else {
            None
        }
    }
}

/// Build the header template a job mines on.
pub fn header_template(store: &ChainStore, job: &MiningJob) -> Result<BlockHeader, MineError> {
    if !store.contains(&job.parent) {
        return Err(MineError::UnknownParent(job.parent));
    }
    let bits = store.next_bits(&job.parent).map_err(|_| MineError::UnknownParent(job.parent))?;
    Ok(BlockHeader {
        version: HEADER_VERSION,
        prev_hash: job.parent,
        merkle_root: header_commitment(&job.records_root, &job.identity),
        timestamp: job.timestamp,
        bits,
        nonce: job.start_nonce,
    })
}

/// Run the mining loop for `job`, counting every hash on `meter`.
pub fn mine_block(
    store: &ChainStore,
    job: &MiningJob,
    interrupt: &dyn Interrupt,
    meter: &HashMeter,
) -> Result<Mined, MineError> {
    if job.budget == 0 {
        return Err(MineError::ZeroBudget);
    }
    let template = header_template(store, job)?;
    let mut search = NonceSearch::new(template, job.start_nonce, job.nonce_stride);
    while search.tried() < job.budget {
        if interrupt.raised() {
            return Err(MineError::Interrupted { hashes: search.tried() });
        }
        if let Some((header, hash)) = search.step(meter) {
            return Ok(Mined { header, hash, hashes: search.tried() });
        }
    }
    Err(MineError::BudgetExhausted { hashes: search.tried() })
}

/// Mine a full block carrying `body` on top of `parent`.
pub fn mine_body(
    store: &ChainStore,
    parent: H256,
    body: Body,
    timestamp: u64,
    budget: u64,
    meter: &HashMeter,
) -> Result<(Block, u64), MineError> {
    let job = MiningJob::new(parent, &body, timestamp, budget);
    let mined = mine_block(store, &job, &Never, meter)?;
    Ok((Block { header: mined.header, body }, mined.hashes))
}
