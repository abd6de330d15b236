//! Wider: a blockchain with one account per shard.
//!
//! Each account owns a subchain of signed transactions. A proof-of-work
//! main chain confirms subchain heads in batches, transfers settle when
//! the receiver claims them, and global state lives in a flat key-value
//! store whose keys carry a reversed block height so the newest version
//! of a variable sorts first.

pub mod account;
pub mod bench;
pub mod chain;
pub mod demo;
pub mod exec;
pub mod record;
pub mod shard;
pub mod state;
pub mod subchain;
pub mod tx;

pub use account::{AccountId, Wallet};
pub use bench::{bench_tps, make_signed_txs, run_trace, tps_csv, verify_parallel, TpsConfig, TpsRow, TraceDriver, VerifyOutcome};
pub use chain::{trivial_difficulty, ApplyError, ApplyMode, Applied, ChainConfig, MainBlock, StorageBytes, TxReject, WiderChain};
pub use demo::{run_demo, DemoOutput};
pub use exec::{ExecError, TxError};
pub use record::{records_per_block, ConfirmationRecord, FRAME_LEN, RECORD_LEN};
pub use shard::{ShardNode, ShardTree};
pub use state::{reversed_height, GlobalState, StateDiff, StateError, StateKey, StateValue, View};
pub use subchain::SubchainStore;
pub use tx::{SubTx, TxKind, TX_LEN};
