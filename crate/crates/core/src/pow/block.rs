use serde::{Deserialize, Serialize};

use super::header::{BlockHeader, HEADER_LEN};
use crate::hash::{hash_parts, H256};
use crate::merkle::MerkleTree;

/// Block payload. `records` are opaque to the chain; `identity` names the
/// miner and is bound into the header through the merkle root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Body {
    pub identity: Vec<u8>,
    pub records: Vec<Vec<u8>>,
}

impl Body {
    pub fn new(identity: impl Into<Vec<u8>>, records: Vec<Vec<u8>>) -> Self {
        Body { identity: identity.into(), records }
    }

    /// Merkle root over the records.
    pub fn records_root(&self) -> H256 {
        MerkleTree::from_data(&self.records).root()
    }

    /// The value placed in the header's `merkle_root`.
    pub fn commitment(&self) -> H256 {
        header_commitment(&self.records_root(), &self.identity)
    }

    pub fn byte_len(&self) -> usize {
        8 + self.identity.len() + self.records.iter().map(|r| 4 + r.len()).sum::<usize>()
    }
}

/// `H(records_root ‖ identity)`.
pub fn header_commitment(records_root: &H256, identity: &[u8]) -> H256 {
    hash_parts(&[records_root.as_bytes(), identity])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub header: BlockHeader,
    pub body: Body,
}

impl Block {
    pub fn hash(&self) -> H256 {
        self.header.hash()
    }

    pub fn body_matches_header(&self) -> bool {
        self.body.commitment() == self.header.merkle_root
    }

    /// header ‖ identity_len(4) ‖ identity ‖ record_count(4) ‖ {len(4) ‖ record}*,
    /// lengths little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.body.byte_len());
        out.extend_from_slice(&self.header.to_bytes());
        out.extend_from_slice(&(self.body.identity.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.body.identity);
        out.extend_from_slice(&(self.body.records.len() as u32).to_le_bytes());
        for r in &self.body.records {
            out.extend_from_slice(&(r.len() as u32).to_le_bytes());
            out.extend_from_slice(r);
        }
        out
    }

    /// Parse one block from the front of `b`, returning it and the bytes used.
    pub fn from_bytes(b: &[u8]) -> Option<(Block, usize)> {
        let header = BlockHeader::from_bytes(b.get(..HEADER_LEN)?)?;
        let mut pos = HEADER_LEN;
        let take_u32 = |pos: &mut usize| -> Option<usize> {
            let v = u32::from_le_bytes(b.get(*pos..*pos + 4)?.try_into().ok()?);
            *pos += 4;
            Some(v as usize)
        };
        let id_len = take_u32(&mut pos)?;
        let identity = b.get(pos..pos + id_len)?.to_vec();
        pos += id_len;
        let count = take_u32(&mut pos)?;
        let mut records = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let len = take_u32(&mut pos)?;
            records.push(b.get(pos..pos + len)?.to_vec());
            pos += len;
        }
        Some((Block { header, body: Body { identity, records } }, pos))
    }
}
