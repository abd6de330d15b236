use serde::{Deserialize, Serialize};

use super::EncodingError;

pub const MIN_DIFFICULTY: u8 = 1;
pub const MAX_DIFFICULTY: u8 = 16;

/// How the encoder picks the block hash each symbol is bound to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BindingMode {
    /// Every symbol uses the first block hash in the feed.
    StaticBlock,
    /// A new block hash takes over at the first symbol not yet sealed.
    FollowChain,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingParams {
    /// Bits per symbol, `L`. Sealing one symbol costs about `2^L` hashes.
    pub difficulty: u8,
    pub node_id: Vec<u8>,
    pub binding: BindingMode,
}

impl EncodingParams {
    pub fn new(difficulty: u8, node_id: impl Into<Vec<u8>>, binding: BindingMode) -> Self {
        EncodingParams { difficulty, node_id: node_id.into(), binding }
    }

    pub fn validate(&self) -> Result<(), EncodingError> {
        if !(MIN_DIFFICULTY..=MAX_DIFFICULTY).contains(&self.difficulty) {
            return Err(EncodingError::InvalidDifficulty(self.difficulty));
        }
        if self.node_id.is_empty() {
            return Err(EncodingError::EmptyNodeId);
        }
        if self.node_id.len() > u16::MAX as usize {
            return Err(EncodingError::NodeIdTooLong(self.node_id.len()));
        }
        Ok(())
    }
}
