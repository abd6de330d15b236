//! Block tree with longest-chain fork choice.
//!
//! The canonical tip is always a tip of maximal height. Among equal-height
//! tips the first one seen keeps the canonical role, so a competing block
//! only displaces the canonical chain by being strictly longer.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::block::{Block, Body};
use super::difficulty::{retarget, DifficultyError, DifficultyParams};
use super::header::{BlockHeader, HEADER_VERSION};
use super::target::Target;
use crate::hash::{HASH_ALG_NAME, H256};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    BadPoW,
    UnknownParent,
    DuplicateBlock,
    /// Header carries a different compact target than the chain demands.
    BadTarget { expected: u32, got: u32 },
    /// Header merkle root does not commit to the body.
    BodyMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AcceptResult {
    ExtendedCanonical,
    NewFork,
    /// The block made a side branch canonical; `depth` blocks of the old
    /// canonical chain above `fork_height` were detached.
    Reorg { depth: u64, fork_height: u64 },
    Rejected(RejectReason),
}

impl AcceptResult {
    pub fn is_accepted(&self) -> bool {
        !matches!(self, AcceptResult::Rejected(_))
    }
}

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("unknown block {0}")]
    UnknownBlock(H256),
    #[error(transparent)]
    Difficulty(#[from] DifficultyError),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt chain data: {0}")]
    Corrupt(String),
}

#[derive(Clone, Debug)]
struct Entry {
    block: Block,
    height: u64,
}

#[derive(Clone, Debug)]
pub struct ChainStore {
    params: DifficultyParams,
    entries: HashMap<H256, Entry>,
    /// Fork tips in first-seen order.
    tips: Vec<H256>,
    /// `canonical[h]` is the canonical block at height `h`.
    canonical: Vec<H256>,
    /// Acceptance order, for append-only persistence.
    arrival: Vec<H256>,
    persisted: usize,
}

/// Tip manifest written next to the block file.
#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ChainManifest {
    pub hash_alg: String,
    pub genesis: H256,
    pub canonical_tip: H256,
    pub canonical_height: u64,
    pub tips: Vec<H256>,
    pub block_count: usize,
    pub params: DifficultyParams,
}

pub const BLOCK_FILE: &str = "blocks.dat";
pub const MANIFEST_FILE: &str = "manifest.json";

impl ChainStore {
    /// Start a chain from a genesis block built from `body`.
    pub fn new(params: DifficultyParams, genesis_body: Body, timestamp: u64) -> Self {
        let header = BlockHeader {
            version: HEADER_VERSION,
            prev_hash: H256::ZERO,
            merkle_root: genesis_body.commitment(),
            timestamp,
            bits: params.initial_target.to_compact(),
            nonce: 0,
        };
        Self::with_genesis(params, Block { header, body: genesis_body })
    }

    /// Genesis is trusted: no PoW or parent check.
    pub fn with_genesis(params: DifficultyParams, genesis: Block) -> Self {
        let h = genesis.hash();
        let mut entries = HashMap::new();
        entries.insert(h, Entry { block: genesis, height: 0 });
        ChainStore {
            params,
            entries,
            tips: vec![h],
            canonical: vec![h],
            arrival: vec![h],
            persisted: 0,
        }
    }

    pub fn params(&self) -> &DifficultyParams {
        &self.params
    }

    pub fn genesis_hash(&self) -> H256 {
        self.canonical[0]
    }

    pub fn canonical_tip(&self) -> H256 {
        *self.canonical.last().unwrap()
    }

    pub fn canonical_height(&self) -> u64 {
        self.canonical.len() as u64 - 1
    }

    pub fn canonical_hash_at(&self, height: u64) -> Option<H256> {
        self.canonical.get(height as usize).copied()
    }

    pub fn is_canonical(&self, h: &H256) -> bool {
        self.height_of(h)
            .and_then(|ht| self.canonical_hash_at(ht))
            .is_some_and(|c| c == *h)
    }

    /// Canonical hashes from genesis to tip.
    pub fn canonical_chain(&self) -> &[H256] {
        &self.canonical
    }

    pub fn tips(&self) -> &[H256] {
        &self.tips
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, h: &H256) -> bool {
        self.entries.contains_key(h)
    }

    pub fn get(&self, h: &H256) -> Option<&Block> {
        self.entries.get(h).map(|e| &e.block)
    }

    pub fn header(&self, h: &H256) -> Option<&BlockHeader> {
        self.get(h).map(|b| &b.header)
    }

    pub fn height_of(&self, h: &H256) -> Option<u64> {
        self.entries.get(h).map(|e| e.height)
    }

    /// Blocks in acceptance order.
    pub fn blocks_in_arrival_order(&self) -> impl Iterator<Item = &Block> {
        self.arrival.iter().map(|h| &self.entries[h].block)
    }

    /// Hashes from `h` back to genesis, inclusive.
    pub fn ancestry(&self, h: &H256) -> Vec<H256> {
        let mut out = vec![];
        let mut cur = *h;
        while let Some(e) = self.entries.get(&cur) {
            out.push(cur);
            if e.height == 0 {
                break;
            }
            cur = e.block.header.prev_hash;
        }
        out
    }

    /// Hashes from genesis up to `h`, inclusive.
    pub fn path_from_genesis(&self, h: &H256) -> Vec<H256> {
        let mut v = self.ancestry(h);
        v.reverse();
        v
    }

    /// Target a child of `parent` must meet.
    pub fn next_target(&self, parent: &H256) -> Result<Target, ChainError> {
        let entry = self.entries.get(parent).ok_or(ChainError::UnknownBlock(*parent))?;
        let child_height = entry.height + 1;
        let interval = self.params.retarget_interval;
        if interval == 0 || child_height % interval != 0 || child_height < interval {
            return Ok(entry.block.header.target());
        }
        let mut history: Vec<BlockHeader> = Vec::with_capacity(interval as usize);
        let mut cur = *parent;
        for _ in 0..interval {
            let e = &self.entries[&cur];
            history.push(e.block.header);
            cur = e.block.header.prev_hash;
        }
        history.reverse();
        Ok(retarget(&history, &self.params)?.normalized())
    }

    pub fn next_bits(&self, parent: &H256) -> Result<u32, ChainError> {
        Ok(self.next_target(parent)?.to_compact())
    }

    /// Validate and insert a block. Rejected blocks leave the store unchanged.
    pub fn accept_block(&mut self, block: Block) -> AcceptResult {
        let h = block.hash();
        if self.entries.contains_key(&h) {
            return AcceptResult::Rejected(RejectReason::DuplicateBlock);
        }
        let parent = block.header.prev_hash;
        let Some(parent_height) = self.height_of(&parent) else {
            return AcceptResult::Rejected(RejectReason::UnknownParent);
        };
        if !block.body_matches_header() {
            return AcceptResult::Rejected(RejectReason::BodyMismatch);
        }
        let expected = match self.next_bits(&parent) {
            Ok(b) => b,
            Err(_) => return AcceptResult::Rejected(RejectReason::UnknownParent),
        };
        if block.header.bits != expected {
            return AcceptResult::Rejected(RejectReason::BadTarget { expected, got: block.header.bits });
        }
        if !block.header.meets_target() {
            return AcceptResult::Rejected(RejectReason::BadPoW);
        }

        let height = parent_height + 1;
        self.entries.insert(h, Entry { block, height });
        self.arrival.push(h);
        if let Some(pos) = self.tips.iter().position(|t| *t == parent) {
            self.tips.remove(pos);
        }
        self.tips.push(h);

        let old_tip = self.canonical_tip();
        if height <= self.canonical_height() {
            return AcceptResult::NewFork;
        }
        if parent == old_tip {
            self.canonical.push(h);
            return AcceptResult::ExtendedCanonical;
        }
        // Strictly longer side branch: rewrite the canonical index back to
        // the fork point.
        let old_height = self.canonical_height();
        let mut new_suffix = vec![];
        let mut cur = h;
        loop {
            let ht = self.entries[&cur].height;
            if self.canonical_hash_at(ht) == Some(cur) {
                break;
            }
            new_suffix.push(cur);
            cur = self.entries[&cur].block.header.prev_hash;
        }
        let fork_height = self.entries[&cur].height;
        self.canonical.truncate(fork_height as usize + 1);
        self.canonical.extend(new_suffix.into_iter().rev());
        AcceptResult::Reorg { depth: old_height - fork_height, fork_height }
    }

    pub fn manifest(&self) -> ChainManifest {
        ChainManifest {
            hash_alg: HASH_ALG_NAME.to_string(),
            genesis: self.genesis_hash(),
            canonical_tip: self.canonical_tip(),
            canonical_height: self.canonical_height(),
            tips: self.tips.clone(),
            block_count: self.entries.len(),
            params: self.params,
        }
    }

    /// Append blocks not yet written to `dir/blocks.dat` (length-prefixed,
    /// acceptance order) and rewrite `dir/manifest.json`.
    pub fn persist(&mut self, dir: &Path) -> Result<(), ChainError> {
        fs::create_dir_all(dir)?;
        let mut f = OpenOptions::new().create(true).append(true).open(dir.join(BLOCK_FILE))?;
        for h in &self.arrival[self.persisted..] {
            let bytes = self.entries[h].block.to_bytes();
            f.write_all(&(bytes.len() as u32).to_le_bytes())?;
            f.write_all(&bytes)?;
        }
        f.sync_data()?;
        self.persisted = self.arrival.len();
        let manifest = serde_json::to_vec_pretty(&self.manifest()).map_err(|e| ChainError::Corrupt(e.to_string()))?;
        fs::write(dir.join(MANIFEST_FILE), manifest)?;
        Ok(())
    }

    /// Rebuild a store by replaying a persisted block file. Every non-genesis
    /// block is re-validated.
    pub fn load(dir: &Path) -> Result<Self, ChainError> {
        let manifest: ChainManifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)
            .map_err(|e| ChainError::Corrupt(e.to_string()))?;
        let data = fs::read(dir.join(BLOCK_FILE))?;
        let mut pos = 0;
        let mut blocks = vec![];
        while pos < data.len() {
            let len = data
                .get(pos..pos + 4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()) as usize)
                .ok_or_else(|| ChainError::Corrupt("truncated length".into()))?;
            pos += 4;
            let raw = data.get(pos..pos + len).ok_or_else(|| ChainError::Corrupt("truncated block".into()))?;
            let (block, used) = Block::from_bytes(raw).ok_or_else(|| ChainError::Corrupt("bad block".into()))?;
            if used != len {
                return Err(ChainError::Corrupt("trailing bytes in block record".into()));
            }
            blocks.push(block);
            pos += len;
        }
        let mut it = blocks.into_iter();
        let genesis = it.next().ok_or_else(|| ChainError::Corrupt("empty block file".into()))?;
        let mut store = ChainStore::with_genesis(manifest.params, genesis);
        for b in it {
            if let AcceptResult::Rejected(r) = store.accept_block(b) {
                return Err(ChainError::Corrupt(format!("stored block rejected: {r:?}")));
            }
        }
        store.persisted = store.arrival.len();
        if store.canonical_tip() != manifest.canonical_tip || store.genesis_hash() != manifest.genesis {
            return Err(ChainError::Corrupt("manifest disagrees with block file".into()));
        }
        Ok(store)
    }
}
