//! Executing confirmed subchain transactions against the global state.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;
use upw_core::H256;

use crate::account::AccountId;
use crate::record::ConfirmationRecord;
use crate::state::{GlobalState, StateDiff, StateKey, StateValue, View};
use crate::subchain::SubchainStore;
use crate::tx::{SubTx, TxKind};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum TxError {
    #[error("bad signature")]
    BadSignature,
    #[error("transfer amount must be positive")]
    ZeroAmount,
    #[error("spends more than the balance")]
    Overspend,
    #[error("claim does not reference a transfer to the claimer confirmed by the given height")]
    BadClaim,
    #[error("transfer already claimed")]
    DuplicateClaim,
    #[error("balance overflow")]
    Overflow,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("two records for {0}")]
    DuplicateRecord(AccountId),
    #[error("record for {account} at seq {got} does not advance confirmed seq {confirmed}")]
    StaleRecord { account: AccountId, confirmed: u64, got: u64 },
    #[error("subchain of {account} lacks seq {seq}")]
    MissingTx { account: AccountId, seq: u64 },
    #[error("subchain of {account} breaks at seq {seq}")]
    BrokenLink { account: AccountId, seq: u64 },
    #[error("record head for {0} is not the subchain transaction at its seq")]
    HeadMismatch(AccountId),
    #[error("transaction {seq} of {account}: {error}")]
    Tx { account: AccountId, seq: u64, error: TxError },
}

/// What execution reads.
pub struct ExecContext<'a> {
    pub state: &'a GlobalState,
    /// Branch ending at the parent block.
    pub view: &'a View,
    /// Height of the block being executed.
    pub height: u64,
    pub subchains: &'a SubchainStore,
    /// Wire hashes of transactions whose signatures were already checked.
    pub verified: Option<&'a HashSet<H256>>,
}

type Writes = BTreeMap<StateKey, StateValue>;

/// Accumulates a block's diff on top of the parent state.
pub struct Executor<'a> {
    ctx: ExecContext<'a>,
    diff: StateDiff,
    seen: HashSet<AccountId>,
    tips: u64,
    new_keys: usize,
}

impl<'a> Executor<'a> {
    pub fn new(ctx: ExecContext<'a>) -> Self {
        Executor { ctx, diff: StateDiff::new(), seen: HashSet::new(), tips: 0, new_keys: 0 }
    }

    fn read(&self, local: &Writes, k: &StateKey) -> Option<StateValue> {
        local.get(k).or_else(|| self.diff.get(k)).copied().or_else(|| self.ctx.state.get(k, self.ctx.view))
    }

    fn balance(&self, local: &Writes, a: AccountId) -> u64 {
        match self.read(local, &StateKey::balance(a)) {
            Some(StateValue::Balance(b)) => b,
            _ => 0,
        }
    }

    fn confirmed_head(&self, a: AccountId) -> (u64, H256) {
        match self.read(&Writes::new(), &StateKey::head(a)) {
            Some(StateValue::Head { seq, hash }) => (seq, hash),
            _ => (0, H256::ZERO),
        }
    }

    fn step(&self, local: &mut Writes, tx: &SubTx, tips: &mut u64) -> Result<(), TxError> {
        let cached = self.ctx.verified.is_some_and(|v| v.contains(&tx.wire_hash()));
        if !cached && !tx.verify_signature() {
            return Err(TxError::BadSignature);
        }
        let a = tx.sender;
        let mut bal = self.balance(local, a);
        match tx.kind {
            TxKind::Transfer { amount, .. } => {
                if amount == 0 {
                    return Err(TxError::ZeroAmount);
                }
            }
            TxKind::Claim { ref_tx, ref_main_height } => {
                let amount = claim_amount(&self.ctx, a, &ref_tx, ref_main_height).ok_or(TxError::BadClaim)?;
                let marker = StateKey::claim(ref_tx);
                if self.read(local, &marker).is_some() {
                    return Err(TxError::DuplicateClaim);
                }
                bal = bal.checked_add(amount).ok_or(TxError::Overflow)?;
                local.insert(marker, StateValue::Claimed { by: a, height: self.ctx.height });
            }
        }
        bal = bal.checked_sub(tx.outgoing()).ok_or(TxError::Overspend)?;
        *tips = tips.checked_add(tx.fee_tip).ok_or(TxError::Overflow)?;
        local.insert(StateKey::balance(a), StateValue::Balance(bal));
        Ok(())
    }

    fn commit(&mut self, local: Writes, tips: u64, account: AccountId) {
        self.new_keys += local.keys().filter(|k| !self.diff.contains_key(k) && !self.ctx.state.knows(k)).count();
        self.diff.extend(local);
        self.tips += tips;
        self.seen.insert(account);
    }

    /// Execute exactly the transactions `record` confirms. Any failure
    /// invalidates the block.
    pub fn confirm(&mut self, record: &ConfirmationRecord) -> Result<(), ExecError> {
        let a = record.account;
        if self.seen.contains(&a) {
            return Err(ExecError::DuplicateRecord(a));
        }
        let (s0, mut prev) = self.confirmed_head(a);
        if record.seq <= s0 {
            return Err(ExecError::StaleRecord { account: a, confirmed: s0, got: record.seq });
        }
        let mut local = Writes::new();
        let mut tips = 0;
        for seq in s0 + 1..=record.seq {
            let tx = self.ctx.subchains.get(&a, seq).ok_or(ExecError::MissingTx { account: a, seq })?;
            if tx.prev != prev {
                return Err(ExecError::BrokenLink { account: a, seq });
            }
            self.step(&mut local, tx, &mut tips).map_err(|error| ExecError::Tx { account: a, seq, error })?;
            prev = tx.hash();
        }
        if prev != record.head {
            return Err(ExecError::HeadMismatch(a));
        }
        local.insert(StateKey::head(a), StateValue::Head { seq: record.seq, hash: prev });
        self.commit(local, tips, a);
        Ok(())
    }

    /// Builder side: confirm the longest valid run of pending
    /// transactions. `key_budget` bounds the new state keys this account
    /// may add. Returns `None` when nothing can be confirmed.
    pub fn confirm_prefix(&mut self, a: AccountId, key_budget: Option<usize>) -> Option<ConfirmationRecord> {
        if self.seen.contains(&a) {
            return None;
        }
        let (s0, mut prev) = self.confirmed_head(a);
        let mut local = Writes::new();
        let mut tips = 0;
        let mut seq = s0;
        for tx in self.ctx.subchains.range(&a, s0 + 1, u64::MAX) {
            let mut trial = local.clone();
            let mut t = tips;
            if tx.prev != prev || self.step(&mut trial, tx, &mut t).is_err() {
                break;
            }
            local = trial;
            tips = t;
            prev = tx.hash();
            seq = tx.seq;
        }
        if seq == s0 {
            return None;
        }
        local.insert(StateKey::head(a), StateValue::Head { seq, hash: prev });
        if let Some(budget) = key_budget {
            let fresh = local.keys().filter(|k| !self.diff.contains_key(k) && !self.ctx.state.knows(k)).count();
            if self.new_keys + fresh > budget {
                return None;
            }
        }
        self.commit(local, tips, a);
        Some(ConfirmationRecord { account: a, head: prev, seq })
    }

    pub fn tips(&self) -> u64 {
        self.tips
    }

    pub fn new_keys(&self) -> usize {
        self.new_keys
    }

    /// Credit collected tips to `miner` and return the diff.
    pub fn finish(mut self, miner: AccountId) -> StateDiff {
        if self.tips > 0 {
            let bal = self.balance(&Writes::new(), miner);
            self.diff.insert(StateKey::balance(miner), StateValue::Balance(bal.saturating_add(self.tips)));
        }
        self.diff
    }
}

/// The amount a claim by `claimer` may credit: the referenced transaction
/// must be a transfer to the claimer, confirmed on this branch at or before
/// `ref_h`, which lies strictly below the block being executed.
pub fn claim_amount(ctx: &ExecContext<'_>, claimer: AccountId, ref_tx: &H256, ref_h: u64) -> Option<u64> {
    if ref_h >= ctx.height || ref_h > ctx.view.height() {
        return None;
    }
    let t = ctx.subchains.find(ref_tx)?;
    let TxKind::Transfer { to, amount } = t.kind else { return None };
    if to != claimer {
        return None;
    }
    let (seq, _) = ctx.state.head(t.sender, &ctx.view.truncated(ref_h));
    (seq >= t.seq).then_some(amount)
}

/// Total pending fee tip of an account's unconfirmed transactions.
pub fn pending_tips(subchains: &SubchainStore, a: &AccountId, confirmed_seq: u64) -> u64 {
    subchains.range(a, confirmed_seq + 1, u64::MAX).iter().map(|t| t.fee_tip).sum()
}
