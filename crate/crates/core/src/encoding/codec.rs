use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::{BindingMode, EncodingParams};
use super::replica::{segment_for, ReplicaFile, Segment};
use super::seal::Sealer;
use super::symbols::{from_symbols, pad_bits, to_symbols};
use super::EncodingError;
use crate::hash::{HashMeter, H256};

/// A block hash and the first symbol index at which the encoder may use it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedEntry {
    pub block_hash: H256,
    pub available_from: u64,
}

impl FeedEntry {
    pub fn new(block_hash: H256, available_from: u64) -> Self {
        FeedEntry { block_hash, available_from }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeStats {
    pub symbols: u64,
    /// Exact hash invocations spent sealing.
    pub hashes: u64,
}

/// Symbols are sealed in batches of this size; each batch is one unit of
/// parallel work.
const BATCH: usize = 1024;

/// Resolve the chain feed into the segment table for `symbol_count` symbols.
pub fn plan_segments(
    feed: &[FeedEntry],
    symbol_count: u64,
    binding: BindingMode,
) -> Result<Vec<Segment>, EncodingError> {
    let first = feed.first().ok_or(EncodingError::EmptyChainFeed)?;
    if first.available_from != 0 {
        return Err(EncodingError::EmptyChainFeed);
    }
    if feed.windows(2).any(|w| w[1].available_from < w[0].available_from) {
        return Err(EncodingError::UnorderedChainFeed);
    }
    if binding == BindingMode::StaticBlock {
        return Ok(vec![Segment { block_hash: first.block_hash, first_index: 0 }]);
    }
    let mut segments: Vec<Segment> = vec![];
    for e in feed.iter().take_while(|e| e.available_from < symbol_count) {
        match segments.last_mut() {
            // Several blocks became available before the same symbol: the
            // newest one wins.
            Some(last) if last.first_index == e.available_from => last.block_hash = e.block_hash,
            _ => segments.push(Segment { block_hash: e.block_hash, first_index: e.available_from }),
        }
    }
    Ok(segments)
}

/// Seal `source` into a replica.
pub fn encode(
    source: &[u8],
    params: &EncodingParams,
    feed: &[FeedEntry],
    meter: &HashMeter,
) -> Result<(ReplicaFile, EncodeStats), EncodingError> {
    params.validate()?;
    if source.is_empty() {
        return Err(EncodingError::EmptySource);
    }
    let symbols = to_symbols(source, params.difficulty);
    let segments = plan_segments(feed, symbols.len() as u64, params.binding)?;
    let (nonces, hashes) = seal_symbols(&symbols, 0, &segments, params, meter)?;
    let replica = ReplicaFile {
        difficulty: params.difficulty,
        pad_bits: pad_bits(source.len(), params.difficulty),
        node_id: params.node_id.clone(),
        segments,
        nonces,
    };
    Ok((replica, EncodeStats { symbols: symbols.len() as u64, hashes }))
}

/// Seal `symbols`, whose first element sits at stream position `offset`.
/// Returns nonces in order and the hash count (also added to `meter`).
pub fn seal_symbols(
    symbols: &[u16],
    offset: u64,
    segments: &[Segment],
    params: &EncodingParams,
    meter: &HashMeter,
) -> Result<(Vec<u64>, u64), EncodingError> {
    let sealers: Vec<Sealer> =
        segments.iter().map(|s| Sealer::new(&params.node_id, &s.block_hash, params.difficulty)).collect();
    let batches: Vec<(Vec<u64>, u64)> = symbols
        .par_chunks(BATCH)
        .enumerate()
        .map(|(b, chunk)| {
            let mut nonces = Vec::with_capacity(chunk.len());
            let mut spent = 0u64;
            for (k, &sym) in chunk.iter().enumerate() {
                let index = offset + (b * BATCH + k) as u64;
                let seg = segments.partition_point(|s| s.first_index <= index).saturating_sub(1);
                let (nonce, cost) = sealers[seg].seal(index, sym)?;
                nonces.push(nonce);
                spent += cost;
            }
            Ok((nonces, spent))
        })
        .collect::<Result<_, EncodingError>>()?;
    let mut nonces = Vec::with_capacity(symbols.len());
    let mut total = 0;
    for (n, h) in batches {
        nonces.extend(n);
        total += h;
    }
    meter.add(total);
    Ok((nonces, total))
}

/// Recover the symbol stream: exactly one hash per symbol.
pub fn decode_symbols(replica: &ReplicaFile, meter: &HashMeter) -> Result<Vec<u16>, EncodingError> {
    replica.validate()?;
    let sealers: Vec<Sealer> = replica
        .segments
        .iter()
        .map(|s| Sealer::new(&replica.node_id, &s.block_hash, replica.difficulty))
        .collect();
    let local = HashMeter::new();
    let symbols: Vec<u16> = replica
        .nonces
        .par_iter()
        .enumerate()
        .map(|(i, &nonce)| {
            let i = i as u64;
            let seg = replica.segments.partition_point(|s| s.first_index <= i).saturating_sub(1);
            sealers[seg].unseal(i, nonce, &local)
        })
        .collect();
    meter.add(local.count());
    Ok(symbols)
}

pub fn decode(replica: &ReplicaFile, meter: &HashMeter) -> Result<Vec<u8>, EncodingError> {
    let symbols = decode_symbols(replica, meter)?;
    from_symbols(&symbols, replica.difficulty, replica.pad_bits)
        .ok_or_else(|| EncodingError::CorruptReplica("pad bits inconsistent".into()))
}

/// Parse, check the trailer, and decode.
pub fn decode_bytes(bytes: &[u8], meter: &HashMeter) -> Result<Vec<u8>, EncodingError> {
    decode(&ReplicaFile::from_bytes(bytes)?, meter)
}

/// Does `nonce` seal `symbol` at `index` under the replica's parameters?
/// One hash.
pub fn check_symbol(
    node_id: &[u8],
    difficulty: u8,
    segments: &[Segment],
    index: u64,
    nonce: u64,
    symbol: u16,
    meter: &HashMeter,
) -> bool {
    let seg = segment_for(segments, index);
    Sealer::new(node_id, &seg.block_hash, difficulty).unseal(index, nonce, meter) == symbol
}
