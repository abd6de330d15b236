//! The main chain: PoW blocks whose bodies confirm subchain heads.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use upw_core::pow::{mine_body, AcceptResult, Block, BlockHeader, Body, ChainStore, DifficultyParams, RejectReason, Target, HEADER_LEN};
use upw_core::{hash_parts, HashMeter, H256};

use crate::account::AccountId;
use crate::exec::{claim_amount, pending_tips, ExecContext, ExecError, Executor, TxError};
use crate::record::{records_per_block, ConfirmationRecord, FRAME_LEN};
use crate::state::{diff_bytes, GlobalState, StateDiff, StateError, StateKey, StateValue, View};
use crate::subchain::SubchainStore;
use crate::tx::{SubTx, TxKind};

/// A main-chain block. `body1` carries the confirmations (the inputs),
/// `body2` the resulting state diff; the header commits to both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainBlock {
    pub header: BlockHeader,
    pub miner: AccountId,
    pub body1: Vec<ConfirmationRecord>,
    pub body2: Option<StateDiff>,
}

impl MainBlock {
    pub fn hash(&self) -> H256 {
        self.header.hash()
    }

    pub fn body1_bytes(&self) -> Vec<u8> {
        self.body1.iter().flat_map(|r| r.frame()).collect()
    }

    pub fn body1_hash(&self) -> H256 {
        hash_parts(&[b"wider-body1", &self.body1_bytes()])
    }

    pub fn body2_hash(&self) -> H256 {
        match &self.body2 {
            Some(d) => hash_parts(&[b"wider-body2", &diff_bytes(d)]),
            None => hash_parts(&[b"wider-body2-absent"]),
        }
    }

    /// The body handed to the PoW layer: miner identity plus both body
    /// hashes as records.
    pub fn pow_body(&self) -> Body {
        Body::new(self.miner.0 .0.to_vec(), vec![self.body1_hash().0.to_vec(), self.body2_hash().0.to_vec()])
    }

    pub fn byte_len(&self) -> u64 {
        (HEADER_LEN + 32 + self.body1.len() * FRAME_LEN + self.body2.as_ref().map_or(0, |d| diff_bytes(d).len()))
            as u64
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
pub enum TxReject {
    #[error("bad signature")]
    BadSig,
    #[error("expected seq {expected} extending the subchain head")]
    BadSeq { expected: u64 },
    #[error("spendable {spendable} < cost {cost}")]
    Overspend { spendable: u64, cost: u64 },
    #[error("transfer already claimed")]
    DuplicateClaim,
    #[error("claim references a transfer not confirmed on the main chain")]
    UnconfirmedClaim,
    #[error("transfer amount must be positive")]
    ZeroAmount,
}

impl TxReject {
    pub fn code(&self) -> &'static str {
        match self {
            TxReject::BadSig => "BadSig",
            TxReject::BadSeq { .. } => "BadSeq",
            TxReject::Overspend { .. } => "Overspend",
            TxReject::DuplicateClaim => "DuplicateClaim",
            TxReject::UnconfirmedClaim => "UnconfirmedClaim",
            TxReject::ZeroAmount => "ZeroAmount",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("unknown parent {0:?}")]
    UnknownParent(H256),
    #[error("block already known")]
    Duplicate,
    #[error("header does not commit to the bodies")]
    BodyMismatch,
    #[error("{got} records exceed the block limit of {max}")]
    TooLarge { max: usize, got: usize },
    #[error("re-execution disagrees with the state diff")]
    DiffMismatch,
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("rejected by the PoW layer: {0:?}")]
    Rejected(RejectReason),
}

/// How a node checks `body2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ApplyMode {
    ReExecute,
    ApplyDiff,
    /// Re-execute with probability `rho`, else apply the diff.
    Sampled(f64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Applied {
    pub result: AcceptResult,
    pub reexecuted: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StorageBytes {
    pub main_chain: u64,
    pub state: u64,
    pub subchains: u64,
}

impl StorageBytes {
    pub fn total(&self) -> u64 {
        self.main_chain + self.state + self.subchains
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Limit on `body1` bytes; `None` means unlimited.
    pub block_size_limit: Option<usize>,
    pub state_cap: Option<usize>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { block_size_limit: Some(1 << 20), state_cap: None }
    }
}

/// Every hash meets the target, so sealing a block costs one hash.
pub fn trivial_difficulty() -> DifficultyParams {
    DifficultyParams { retarget_interval: 1 << 40, target_spacing: 1, initial_target: Target::MAX }
}

/// One node's view of the Wider system.
#[derive(Clone)]
pub struct WiderChain {
    config: ChainConfig,
    store: ChainStore,
    blocks: HashMap<H256, MainBlock>,
    state: GlobalState,
    subchains: SubchainStore,
    verified: HashSet<H256>,
    genesis_alloc: BTreeMap<AccountId, u64>,
}

impl WiderChain {
    pub fn new(alloc: &BTreeMap<AccountId, u64>, config: ChainConfig) -> Self {
        let diff: StateDiff = alloc.iter().map(|(a, b)| (StateKey::balance(*a), StateValue::Balance(*b))).collect();
        let mut genesis = MainBlock {
            header: BlockHeader::default(),
            miner: AccountId::default(),
            body1: vec![],
            body2: Some(diff.clone()),
        };
        let store = ChainStore::new(trivial_difficulty(), genesis.pow_body(), 0);
        let gh = store.genesis_hash();
        genesis.header = *store.header(&gh).expect("genesis");
        let mut state = config.state_cap.map(GlobalState::with_cap).unwrap_or_default();
        state.apply_diff(&diff, 0, &gh).expect("genesis allocation exceeds the state cap");
        let mut blocks = HashMap::new();
        blocks.insert(gh, genesis);
        WiderChain {
            config,
            store,
            blocks,
            state,
            subchains: SubchainStore::default(),
            verified: HashSet::new(),
            genesis_alloc: alloc.clone(),
        }
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn store(&self) -> &ChainStore {
        &self.store
    }

    pub fn state(&self) -> &GlobalState {
        &self.state
    }

    pub fn subchains(&self) -> &SubchainStore {
        &self.subchains
    }

    /// Direct subchain access for injecting transactions that bypass the
    /// mempool checks.
    pub fn subchains_mut(&mut self) -> &mut SubchainStore {
        &mut self.subchains
    }

    /// Give another node's subchain data to this one (gossip).
    pub fn sync_subchains(&mut self, from: &WiderChain) {
        self.subchains = from.subchains.clone();
    }

    pub fn block(&self, h: &H256) -> Option<&MainBlock> {
        self.blocks.get(h)
    }

    pub fn tip(&self) -> H256 {
        self.store.canonical_tip()
    }

    pub fn height(&self) -> u64 {
        self.store.canonical_height()
    }

    pub fn view_of(&self, h: &H256) -> View {
        View::new(self.store.path_from_genesis(h))
    }

    pub fn tip_view(&self) -> View {
        View::new(self.store.canonical_chain().to_vec())
    }

    pub fn balance(&self, a: AccountId) -> u64 {
        self.state.balance(a, &self.tip_view())
    }

    pub fn confirmed_seq(&self, a: AccountId) -> u64 {
        self.state.head(a, &self.tip_view()).0
    }

    /// Canonical blocks after genesis, in height order.
    pub fn canonical_blocks(&self) -> Vec<&MainBlock> {
        self.store.canonical_chain()[1..].iter().map(|h| &self.blocks[h]).collect()
    }

    pub fn state_head(&self) -> H256 {
        self.state.head_digest(&self.tip_view())
    }

    pub fn snapshot(&self) -> String {
        self.state.export_snapshot(&self.tip_view())
    }

    fn ctx<'a>(&'a self, view: &'a View, use_cache: bool) -> ExecContext<'a> {
        ExecContext {
            state: &self.state,
            view,
            height: view.height() + 1,
            subchains: &self.subchains,
            verified: use_cache.then_some(&self.verified),
        }
    }

    /// Validate a transaction against the canonical tip and append it to
    /// the sender's subchain.
    pub fn submit_tx(&mut self, tx: SubTx) -> Result<H256, TxReject> {
        let id = tx.hash();
        let wire = tx.wire_hash();
        if !self.verified.contains(&wire) && !tx.verify_signature() {
            return Err(TxReject::BadSig);
        }
        let a = tx.sender;
        let expected = self.subchains.len(&a) + 1;
        if tx.seq != expected || tx.prev != self.subchains.last_hash(&a) {
            return Err(TxReject::BadSeq { expected });
        }
        let view = self.tip_view();
        let (confirmed, _) = self.state.head(a, &view);
        let pending = self.subchains.range(&a, confirmed + 1, u64::MAX);
        let pending_out: u64 = pending.iter().map(|t| t.outgoing()).sum();
        let spendable = self.state.balance(a, &view).saturating_sub(pending_out);
        let mut credit = 0;
        match tx.kind {
            TxKind::Transfer { amount: 0, .. } => return Err(TxReject::ZeroAmount),
            TxKind::Transfer { .. } => {}
            TxKind::Claim { ref_tx, ref_main_height } => {
                let dup_pending =
                    pending.iter().any(|t| matches!(t.kind, TxKind::Claim { ref_tx: r, .. } if r == ref_tx));
                if dup_pending || self.state.get(&StateKey::claim(ref_tx), &view).is_some() {
                    return Err(TxReject::DuplicateClaim);
                }
                credit = claim_amount(&self.ctx(&view, true), a, &ref_tx, ref_main_height)
                    .ok_or(TxReject::UnconfirmedClaim)?;
            }
        }
        let cost = tx.outgoing();
        if cost > spendable.saturating_add(credit) {
            return Err(TxReject::Overspend { spendable, cost });
        }
        self.verified.insert(wire);
        self.subchains.append_unchecked(tx);
        Ok(id)
    }

    /// Accounts with unconfirmed transactions on the branch ending at
    /// `parent`, ordered by pending fee tips (highest first), then id.
    pub fn pending_accounts(&self, parent: &H256) -> Vec<AccountId> {
        let view = self.view_of(parent);
        let mut v: Vec<(u64, AccountId)> = self
            .subchains
            .accounts()
            .filter_map(|a| {
                let (seq, _) = self.state.head(*a, &view);
                (self.subchains.len(a) > seq).then(|| (pending_tips(&self.subchains, a, seq), *a))
            })
            .collect();
        v.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        v.into_iter().map(|(_, a)| a).collect()
    }

    /// Assemble and seal a block on `parent` confirming as many pending
    /// subchains as fit.
    pub fn build_main_block(&self, parent: &H256, miner: AccountId, timestamp: u64) -> MainBlock {
        let view = self.view_of(parent);
        let max = self.config.block_size_limit.map_or(usize::MAX, records_per_block);
        let budget = self.state.cap().map(|c| c.saturating_sub(self.state.key_count() + 1));
        let mut exec = Executor::new(self.ctx(&view, true));
        let mut body1 = vec![];
        for a in self.pending_accounts(parent) {
            if body1.len() >= max {
                break;
            }
            if let Some(r) = exec.confirm_prefix(a, budget) {
                body1.push(r);
            }
        }
        let diff = exec.finish(miner);
        let block = MainBlock { header: BlockHeader::default(), miner, body1, body2: Some(diff) };
        self.seal(block, parent, timestamp)
    }

    /// Mine `block` on `parent`, replacing its header.
    pub fn seal(&self, mut block: MainBlock, parent: &H256, timestamp: u64) -> MainBlock {
        let (b, _) =
            mine_body(&self.store, *parent, block.pow_body(), timestamp, 1 << 24, &HashMeter::new()).expect("trivial target");
        block.header = b.header;
        block
    }

    /// Execute `body1` on the branch ending at the block's parent.
    pub fn execute(&self, block: &MainBlock, use_cache: bool) -> Result<StateDiff, ExecError> {
        let view = self.view_of(&block.header.prev_hash);
        let mut exec = Executor::new(self.ctx(&view, use_cache));
        for r in &block.body1 {
            exec.confirm(r)?;
        }
        Ok(exec.finish(block.miner))
    }

    pub fn apply_main_block<R: Rng + ?Sized>(
        &mut self,
        block: &MainBlock,
        mode: ApplyMode,
        rng: &mut R,
    ) -> Result<Applied, ApplyError> {
        let parent = block.header.prev_hash;
        let h = block.hash();
        if !self.store.contains(&parent) {
            return Err(ApplyError::UnknownParent(parent));
        }
        if self.store.contains(&h) {
            return Err(ApplyError::Duplicate);
        }
        if block.pow_body().commitment() != block.header.merkle_root {
            return Err(ApplyError::BodyMismatch);
        }
        if let Some(limit) = self.config.block_size_limit {
            let max = records_per_block(limit);
            if block.body1.len() > max {
                return Err(ApplyError::TooLarge { max, got: block.body1.len() });
            }
        }
        let reexecuted = match mode {
            ApplyMode::ReExecute => true,
            ApplyMode::ApplyDiff => block.body2.is_none(),
            ApplyMode::Sampled(rho) => {
                let draw = rng.gen_bool(rho.clamp(0.0, 1.0));
                draw || block.body2.is_none()
            }
        };
        let diff = if reexecuted {
            let computed = self.execute(block, true)?;
            if block.body2.as_ref().is_some_and(|d| *d != computed) {
                return Err(ApplyError::DiffMismatch);
            }
            computed
        } else {
            block.body2.clone().expect("checked")
        };
        self.state.check_cap(&diff)?;
        let result = self.store.accept_block(Block { header: block.header, body: block.pow_body() });
        if let AcceptResult::Rejected(r) = result {
            return Err(ApplyError::Rejected(r));
        }
        let height = self.store.height_of(&h).expect("accepted");
        self.state.apply_diff(&diff, height, &h)?;
        self.blocks.insert(h, block.clone());
        Ok(Applied { result, reexecuted })
    }

    /// A fresh node holding the same subchains that re-executes the
    /// canonical chain from genesis.
    pub fn replay_from_genesis(&self) -> Result<WiderChain, ApplyError> {
        let mut fresh = WiderChain::new(&self.genesis_alloc, self.config.clone());
        fresh.subchains = self.subchains.clone();
        let mut rng = rand::rngs::mock::StepRng::new(0, 0);
        for b in self.canonical_blocks() {
            fresh.apply_main_block(b, ApplyMode::ReExecute, &mut rng)?;
        }
        Ok(fresh)
    }

    /// Transactions confirmed by `block` on its own branch.
    pub fn confirmed_by(&self, block: &MainBlock) -> Vec<&SubTx> {
        let view = self.view_of(&block.header.prev_hash);
        block
            .body1
            .iter()
            .flat_map(|r| {
                let (s0, _) = self.state.head(r.account, &view);
                self.subchains.range(&r.account, s0 + 1, r.seq)
            })
            .collect()
    }

    /// Bytes a node with group `label` keeps: the whole main chain, the
    /// latest state, and the subchains under its label.
    pub fn storage_bytes(&self, label: &str) -> StorageBytes {
        StorageBytes {
            main_chain: self.store.canonical_chain().iter().map(|h| self.blocks[h].byte_len()).sum(),
            state: self.state.latest_bytes(&self.tip_view()),
            subchains: self.subchains.bytes_under(label),
        }
    }
}

pub fn is_tx_error(e: &ApplyError, want: TxError) -> bool {
    matches!(e, ApplyError::Exec(ExecError::Tx { error, .. }) if *error == want)
}
