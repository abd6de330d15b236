//! Hash chain, Nakamoto mining, difficulty retargeting and fork choice.

pub mod block;
pub mod chain;
pub mod difficulty;
pub mod header;
pub mod mining;
pub mod target;

pub use block::{Block, Body};
pub use chain::{AcceptResult, ChainError, ChainManifest, ChainStore, RejectReason};
pub use difficulty::{retarget, DifficultyError, DifficultyParams};
pub use header::{BlockHeader, HEADER_LEN};
pub use mining::{mine_block, mine_body, Interrupt, MineError, Mined, MiningJob, Never, NonceSearch};
pub use target::Target;
