use serde::{Deserialize, Serialize};
use upw_core::H256;

use crate::account::AccountId;

/// Content bytes: account ‖ head ‖ seq.
pub const RECORD_LEN: usize = 72;
/// On-wire frame, zero padded.
pub const FRAME_LEN: usize = 512;

/// Fixes an account's subchain at `head` (transaction `seq`), confirming
/// every transaction up to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfirmationRecord {
    pub account: AccountId,
    pub head: H256,
    pub seq: u64,
}

impl ConfirmationRecord {
    pub fn to_bytes(&self) -> [u8; RECORD_LEN] {
        let mut b = [0u8; RECORD_LEN];
        b[..32].copy_from_slice(self.account.0.as_bytes());
        b[32..64].copy_from_slice(self.head.as_bytes());
        b[64..].copy_from_slice(&self.seq.to_be_bytes());
        b
    }

    pub fn frame(&self) -> Vec<u8> {
        let mut f = vec![0u8; FRAME_LEN];
        f[..RECORD_LEN].copy_from_slice(&self.to_bytes());
        f
    }

    /// Parses a frame; the padding must be zero.
    pub fn from_frame(f: &[u8]) -> Option<Self> {
        if f.len() != FRAME_LEN || f[RECORD_LEN..].iter().any(|&b| b != 0) {
            return None;
        }
        Some(ConfirmationRecord {
            account: AccountId(H256(f[..32].try_into().unwrap())),
            head: H256(f[32..64].try_into().unwrap()),
            seq: u64::from_be_bytes(f[64..72].try_into().unwrap()),
        })
    }
}

/// How many framed records fit in `limit` bytes of body.
pub fn records_per_block(limit: usize) -> usize {
    limit / FRAME_LEN
}
