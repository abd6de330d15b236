//! Mining and sealing as two consumers of one hash budget.
//!
//! The miner alternates slices of header hashing and symbol sealing. When a
//! block is found it is appended to the chain, the header search restarts
//! on the new tip, and (in follow-chain mode) sealing switches to the new
//! block hash at the first symbol not yet sealed; the partial search for
//! that symbol is thrown away, as the header search is.

use serde::Serialize;
use thiserror::Error;

use super::params::{BindingMode, EncodingParams};
use super::replica::{ReplicaFile, Segment};
use super::seal::{Sealer, SymbolSearch};
use super::symbols::{pad_bits, to_symbols};
use super::EncodingError;
use crate::hash::{HashMeter, H256};
use crate::pow::mining::{header_template, MiningJob, NonceSearch};
use crate::pow::{AcceptResult, Block, Body, ChainStore};

#[derive(Clone, Debug)]
pub struct UsefulMiningConfig {
    pub identity: Vec<u8>,
    /// Timestamp of the block mined at height `h` is
    /// `start_timestamp + h * block_spacing`.
    pub start_timestamp: u64,
    pub block_spacing: u64,
    /// Header hashes per turn.
    pub mining_slice: u64,
    /// Sealing hashes per turn.
    pub encoding_slice: u64,
    /// Abort once this many hashes (both kinds) have been spent.
    pub max_hashes: u64,
}

impl Default for UsefulMiningConfig {
    fn default() -> Self {
        UsefulMiningConfig {
            identity: b"useful-miner".to_vec(),
            start_timestamp: 0,
            block_spacing: 600,
            mining_slice: 64,
            encoding_slice: 64,
            max_hashes: u64::MAX,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UsefulMiningReport {
    #[serde(skip)]
    pub replica: ReplicaFile,
    pub blocks: Vec<H256>,
    pub mining_hashes: u64,
    /// All sealing hashes, including searches abandoned on a new block.
    pub encoding_hashes: u64,
    pub discarded_encoding_hashes: u64,
}

#[derive(Debug, Error)]
pub enum UsefulMiningError {
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("hash budget of {0} exhausted")]
    BudgetExhausted(u64),
    #[error("mined block rejected: {0:?}")]
    Rejected(AcceptResult),
}

fn fresh_search(store: &ChainStore, cfg: &UsefulMiningConfig) -> NonceSearch {
    let tip = store.canonical_tip();
    let body = Body::new(cfg.identity.clone(), vec![]);
    let height = store.canonical_height() + 1;
    let job = MiningJob::new(tip, &body, cfg.start_timestamp + height * cfg.block_spacing, 1);
    let template = header_template(store, &job).expect("canonical tip is in the store");
    NonceSearch::new(template, 0, 1)
}

/// Seal `source` while mining on `store`'s canonical tip.
pub fn mine_and_encode(
    store: &mut ChainStore,
    source: &[u8],
    params: &EncodingParams,
    cfg: &UsefulMiningConfig,
) -> Result<UsefulMiningReport, UsefulMiningError> {
    params.validate()?;
    if source.is_empty() {
        return Err(EncodingError::EmptySource.into());
    }
    let symbols = to_symbols(source, params.difficulty);
    let mine_meter = HashMeter::new();
    let enc_meter = HashMeter::new();

    let mut segments = vec![Segment { block_hash: store.canonical_tip(), first_index: 0 }];
    let mut sealer = Sealer::new(&params.node_id, &store.canonical_tip(), params.difficulty);
    let mut nonces: Vec<u64> = Vec::with_capacity(symbols.len());
    let mut pending: Option<SymbolSearch> = None;
    let mut discarded = 0u64;
    let mut blocks = vec![];
    let mut search = fresh_search(store, cfg);

    while nonces.len() < symbols.len() {
        let spent = mine_meter.count() + enc_meter.count();
        if spent >= cfg.max_hashes {
            return Err(UsefulMiningError::BudgetExhausted(spent));
        }
        for _ in 0..cfg.mining_slice {
            let Some((header, _)) = search.step(&mine_meter) else { continue };
            let block = Block { header, body: Body::new(cfg.identity.clone(), vec![]) };
            let h = block.hash();
            match store.accept_block(block) {
                AcceptResult::ExtendedCanonical => {}
                other => return Err(UsefulMiningError::Rejected(other)),
            }
            blocks.push(h);
            search = fresh_search(store, cfg);
            if params.binding == BindingMode::FollowChain {
                discarded += pending.take().map_or(0, |p| p.tried());
                sealer = Sealer::new(&params.node_id, &h, params.difficulty);
                let next = nonces.len() as u64;
                match segments.last_mut() {
                    Some(last) if last.first_index == next => last.block_hash = h,
                    _ => segments.push(Segment { block_hash: h, first_index: next }),
                }
            }
            break;
        }
        for _ in 0..cfg.encoding_slice {
            let idx = nonces.len();
            if idx == symbols.len() {
                break;
            }
            let s = pending.get_or_insert_with(|| sealer.search(idx as u64, symbols[idx]));
            if let Some(n) = s.step(&enc_meter) {
                nonces.push(n);
                pending = None;
            }
        }
    }

    let replica = ReplicaFile {
        difficulty: params.difficulty,
        pad_bits: pad_bits(source.len(), params.difficulty),
        node_id: params.node_id.clone(),
        segments,
        nonces,
    };
    Ok(UsefulMiningReport {
        replica,
        blocks,
        mining_hashes: mine_meter.count(),
        encoding_hashes: enc_meter.count(),
        discarded_encoding_hashes: discarded,
    })
}
