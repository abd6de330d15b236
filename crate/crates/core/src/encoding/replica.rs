//! Bit-exact replica file format.
//!
//! ```text
//! magic "UPW1"(4) ‖ format_version(1) ‖ hash_alg_tag(1) ‖ difficulty_L(1) ‖
//! pad_bits(1) ‖ node_id_len(2) ‖ node_id ‖ segment_count(4) ‖
//! segments[{block_hash(32), first_index(8)}] ‖ symbol_count(8) ‖
//! nonces(8 each) ‖ trailer_digest(32)
//! ```
//!
//! All integers are big-endian. The trailer is the workspace hash of every
//! preceding byte.

use serde::{Deserialize, Serialize};

use super::params::{MAX_DIFFICULTY, MIN_DIFFICULTY};
use super::EncodingError;
use crate::hash::{hash, HASH_ALG_TAG, H256};

pub const MAGIC: &[u8; 4] = b"UPW1";
pub const FORMAT_VERSION: u8 = 1;

/// A run of symbols sealed against one block hash, starting at
/// `first_index` and ending where the next segment starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub block_hash: H256,
    pub first_index: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplicaFile {
    pub difficulty: u8,
    pub pad_bits: u8,
    pub node_id: Vec<u8>,
    pub segments: Vec<Segment>,
    pub nonces: Vec<u64>,
}

fn corrupt(msg: impl Into<String>) -> EncodingError {
    EncodingError::CorruptReplica(msg.into())
}

impl ReplicaFile {
    pub fn symbol_count(&self) -> u64 {
        self.nonces.len() as u64
    }

    /// Length in bytes of the encoded source.
    pub fn source_len(&self) -> u64 {
        (self.symbol_count() * self.difficulty as u64).saturating_sub(self.pad_bits as u64) / 8
    }

    /// Block hash the symbol at `index` was sealed against.
    pub fn block_hash_for(&self, index: u64) -> H256 {
        segment_for(&self.segments, index).block_hash
    }

    /// Structural checks that parsing alone does not guarantee.
    pub fn validate(&self) -> Result<(), EncodingError> {
        if !(MIN_DIFFICULTY..=MAX_DIFFICULTY).contains(&self.difficulty) {
            return Err(corrupt(format!("difficulty {} out of range", self.difficulty)));
        }
        if self.node_id.is_empty() || self.node_id.len() > u16::MAX as usize {
            return Err(corrupt("node id length"));
        }
        if self.nonces.is_empty() {
            return Err(corrupt("no symbols"));
        }
        if self.segments.is_empty() {
            return Err(corrupt("empty segment table"));
        }
        if self.segments[0].first_index != 0 {
            return Err(corrupt("first segment must start at symbol 0"));
        }
        if self.segments.windows(2).any(|w| w[1].first_index <= w[0].first_index) {
            return Err(corrupt("segment indices not strictly increasing"));
        }
        if self.segments.last().unwrap().first_index >= self.symbol_count() {
            return Err(corrupt("segment starts past the last symbol"));
        }
        let bits = self.symbol_count() * self.difficulty as u64;
        if self.pad_bits >= self.difficulty || bits < self.pad_bits as u64 || (bits - self.pad_bits as u64) % 8 != 0 {
            return Err(corrupt("pad bits inconsistent with symbol count"));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 4 + 2 + self.node_id.len() + 4 + 40 * self.segments.len() + 8 + 8 * self.nonces.len() + 32);
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);
        out.push(HASH_ALG_TAG);
        out.push(self.difficulty);
        out.push(self.pad_bits);
        out.extend_from_slice(&(self.node_id.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.node_id);
        out.extend_from_slice(&(self.segments.len() as u32).to_be_bytes());
        for s in &self.segments {
            out.extend_from_slice(s.block_hash.as_bytes());
            out.extend_from_slice(&s.first_index.to_be_bytes());
        }
        out.extend_from_slice(&(self.nonces.len() as u64).to_be_bytes());
        for n in &self.nonces {
            out.extend_from_slice(&n.to_be_bytes());
        }
        let trailer = hash(&out);
        out.extend_from_slice(trailer.as_bytes());
        out
    }

    /// Parse and validate. Any structural or trailer problem is
    /// `CorruptReplica`.
    pub fn from_bytes(b: &[u8]) -> Result<ReplicaFile, EncodingError> {
        if b.len() < 32 {
            return Err(corrupt("shorter than trailer"));
        }
        let (body, trailer) = b.split_at(b.len() - 32);
        if hash(body).as_bytes() != trailer {
            return Err(corrupt("trailer digest mismatch"));
        }
        let mut r = Reader { b: body, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = r.u8()?;
        if version != FORMAT_VERSION {
            return Err(corrupt(format!("unsupported format version {version}")));
        }
        let alg = r.u8()?;
        if alg != HASH_ALG_TAG {
            return Err(corrupt(format!("unsupported hash algorithm tag {alg}")));
        }
        let difficulty = r.u8()?;
        let pad_bits = r.u8()?;
        let id_len = u16::from_be_bytes(r.take(2)?.try_into().unwrap()) as usize;
        let node_id = r.take(id_len)?.to_vec();
        let seg_count = u32::from_be_bytes(r.take(4)?.try_into().unwrap()) as usize;
        let mut segments = Vec::with_capacity(seg_count.min(1 << 16));
        for _ in 0..seg_count {
            let block_hash = H256(r.take(32)?.try_into().unwrap());
            let first_index = r.u64()?;
            segments.push(Segment { block_hash, first_index });
        }
        let symbol_count = r.u64()?;
        if symbol_count.checked_mul(8) != Some((body.len() - r.pos) as u64) {
            return Err(corrupt("nonce stream length disagrees with symbol count"));
        }
        let nonces = (0..symbol_count).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
        let replica = ReplicaFile { difficulty, pad_bits, node_id, segments, nonces };
        replica.validate()?;
        Ok(replica)
    }
}

/// Segment covering `index`. `segments` must be non-empty and start at 0.
pub fn segment_for(segments: &[Segment], index: u64) -> &Segment {
    let pos = segments.partition_point(|s| s.first_index <= index);
    &segments[pos.saturating_sub(1)]
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EncodingError> {
        let s = self.b.get(self.pos..self.pos + n).ok_or_else(|| corrupt("truncated"))?;
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, EncodingError> {
        Ok(self.take(1)?[0])
    }
    fn u64(&mut self) -> Result<u64, EncodingError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReplicaFile {
        ReplicaFile {
            difficulty: 8,
            pad_bits: 0,
            node_id: b"A".to_vec(),
            segments: vec![
                Segment { block_hash: H256([1; 32]), first_index: 0 },
                Segment { block_hash: H256([2; 32]), first_index: 2 },
            ],
            nonces: vec![5, 6, 7],
        }
    }

    #[test]
    fn layout_is_exact() {
        let b = sample().to_bytes();
        assert_eq!(&b[..4], b"UPW1");
        assert_eq!(&b[4..8], &[1, HASH_ALG_TAG, 8, 0]);
        assert_eq!(&b[8..10], &[0, 1]);
        assert_eq!(b[10], b'A');
        assert_eq!(&b[11..15], &[0, 0, 0, 2]);
        // two segments of 40 bytes, then symbol count
        assert_eq!(&b[95..103], &3u64.to_be_bytes());
        assert_eq!(&b[103..111], &5u64.to_be_bytes());
        assert_eq!(b.len(), 4 + 4 + 2 + 1 + 4 + 80 + 8 + 24 + 32);
        assert_eq!(ReplicaFile::from_bytes(&b).unwrap(), sample());
    }

    #[test]
    fn trailer_mismatch_is_corrupt() {
        let mut b = sample().to_bytes();
        let n = b.len();
        b[n - 40] ^= 1;
        assert!(matches!(ReplicaFile::from_bytes(&b), Err(EncodingError::CorruptReplica(_))));
    }

    #[test]
    fn empty_segment_table_is_corrupt() {
        let mut r = sample();
        r.segments.clear();
        assert!(matches!(ReplicaFile::from_bytes(&r.to_bytes()), Err(EncodingError::CorruptReplica(_))));
    }

    #[test]
    fn non_increasing_segments_are_corrupt() {
        let mut r = sample();
        r.segments[1].first_index = 0;
        assert!(r.validate().is_err());
    }

    #[test]
    fn segment_lookup() {
        let r = sample();
        assert_eq!(r.block_hash_for(0), H256([1; 32]));
        assert_eq!(r.block_hash_for(1), H256([1; 32]));
        assert_eq!(r.block_hash_for(2), H256([2; 32]));
    }
}
