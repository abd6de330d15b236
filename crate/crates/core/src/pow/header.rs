use serde::{Deserialize, Serialize};

use super::target::Target;
use crate::hash::{hash, H256};

/// Serialized header length: version(4) ‖ prev_hash(32) ‖ merkle_root(32) ‖
/// timestamp(8) ‖ target(compact, 4) ‖ nonce(8). Integers are little-endian.
pub const HEADER_LEN: usize = 88;

pub const HEADER_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockHeader {
    pub version: u32,
    pub prev_hash: H256,
    pub merkle_root: H256,
    pub timestamp: u64,
    /// Compact target.
    pub bits: u32,
    pub nonce: u64,
}

impl BlockHeader {
    pub fn target(&self) -> Target {
        Target::from_compact(self.bits)
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        self.write_prefix(&mut out);
        out[80..88].copy_from_slice(&self.nonce.to_le_bytes());
        out
    }

    /// Everything but the nonce; miners hash `prefix ‖ nonce`.
    pub(crate) fn write_prefix(&self, out: &mut [u8; HEADER_LEN]) {
        out[0..4].copy_from_slice(&self.version.to_le_bytes());
        out[4..36].copy_from_slice(self.prev_hash.as_bytes());
        out[36..68].copy_from_slice(self.merkle_root.as_bytes());
        out[68..76].copy_from_slice(&self.timestamp.to_le_bytes());
        out[76..80].copy_from_slice(&self.bits.to_le_bytes());
    }

    pub fn from_bytes(b: &[u8]) -> Option<BlockHeader> {
        if b.len() != HEADER_LEN {
            return None;
        }
        let u64_at = |i: usize| u64::from_le_bytes(b[i..i + 8].try_into().unwrap());
        Some(BlockHeader {
            version: u32::from_le_bytes(b[0..4].try_into().unwrap()),
            prev_hash: H256(b[4..36].try_into().unwrap()),
            merkle_root: H256(b[36..68].try_into().unwrap()),
            timestamp: u64_at(68),
            bits: u32::from_le_bytes(b[76..80].try_into().unwrap()),
            nonce: u64_at(80),
        })
    }

    pub fn hash(&self) -> H256 {
        hash(&self.to_bytes())
    }

    pub fn meets_target(&self) -> bool {
        self.target().is_met_by(&self.hash())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn field_offsets_are_fixed() {
        let h = BlockHeader {
            version: 0x0403_0201,
            prev_hash: H256([0xaa; 32]),
            merkle_root: H256([0xbb; 32]),
            timestamp: 0x0102,
            bits: 0x2001_0000,
            nonce: 7,
        };
        let b = h.to_bytes();
        assert_eq!(&b[0..4], &[1, 2, 3, 4]);
        assert_eq!(b[4], 0xaa);
        assert_eq!(b[36], 0xbb);
        assert_eq!(&b[68..70], &[0x02, 0x01]);
        assert_eq!(&b[76..80], &[0, 0, 1, 0x20]);
        assert_eq!(b[80], 7);
    }

    proptest! {
        #[test]
        fn bytes_roundtrip(v in any::<u32>(), p in any::<[u8; 32]>(), m in any::<[u8; 32]>(),
                           t in any::<u64>(), bits in any::<u32>(), n in any::<u64>()) {
            let h = BlockHeader { version: v, prev_hash: H256(p), merkle_root: H256(m),
                                  timestamp: t, bits, nonce: n };
            prop_assert_eq!(BlockHeader::from_bytes(&h.to_bytes()), Some(h));
        }
    }
}
