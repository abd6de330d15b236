//! Permissionless storage network simulator.
//!
//! Users keep a file space with a primary storage node and its backups;
//! resource providers seal chunk replicas with the useful-work encoder and
//! answer random challenges; verifiers audit optimistically and the primary
//! rechecks disputes. A contract ledger holds prepaid balances and pays
//! providers each epoch.

pub mod access;
pub mod config;
pub mod events;
pub mod filespace;
pub mod ledger;
pub mod network;
pub mod sim;

pub use access::{
    encrypt_chunk, grant_access, open_own, open_without_grant, retrieve, retrieve_with, AccessError, EncryptedChunk,
    GrantStore,
};
pub use config::{CheatKind, CheaterProfile, OutageProfile, Price, SimConfig, UploadSpec, UserSpec};
pub use events::{EventLog, EventQueue};
pub use filespace::{ChunkRef, FileEntry, FileSpaceState, UserOp};
pub use ledger::{EntryKind, Ledger, LedgerEntry, StorageContractRecord};
pub use network::{
    Assignment, FailoverOutcome, NetParams, Network, OpOutcome, Payment, ProviderMode, Reassignment, RoundAction,
    SettleOutcome, StorageError, VerdictRow,
};
pub use sim::{run_sim, EpochStats, SimOutput, SimReport};
