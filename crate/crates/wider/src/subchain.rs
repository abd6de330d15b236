//! Per-account transaction logs. Each account's log is its shard.

use std::collections::{BTreeMap, HashMap};

use upw_core::H256;

use crate::account::AccountId;
use crate::tx::{SubTx, TX_LEN};

#[derive(Clone, Debug, Default)]
pub struct SubchainStore {
    chains: BTreeMap<AccountId, Vec<SubTx>>,
    by_hash: HashMap<H256, (AccountId, u64)>,
}

impl SubchainStore {
    pub fn len(&self, a: &AccountId) -> u64 {
        self.chains.get(a).map_or(0, |c| c.len() as u64)
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// The transaction with sequence number `seq` (1-based).
    pub fn get(&self, a: &AccountId, seq: u64) -> Option<&SubTx> {
        seq.checked_sub(1).and_then(|i| self.chains.get(a)?.get(i as usize))
    }

    /// Transactions with `from <= seq <= to`.
    pub fn range(&self, a: &AccountId, from: u64, to: u64) -> &[SubTx] {
        let Some(c) = self.chains.get(a) else { return &[] };
        let lo = (from.max(1) - 1) as usize;
        let hi = (to as usize).min(c.len());
        if lo >= hi {
            &[]
        } else {
            &c[lo..hi]
        }
    }

    pub fn find(&self, tx: &H256) -> Option<&SubTx> {
        let (a, seq) = self.by_hash.get(tx)?;
        self.get(a, *seq)
    }

    pub fn last_hash(&self, a: &AccountId) -> H256 {
        self.chains.get(a).and_then(|c| c.last()).map_or(H256::ZERO, |t| t.hash())
    }

    /// Appends without checking anything but position. Nodes validate
    /// signatures and balances before calling this; tests use it directly
    /// to inject invalid transactions.
    pub fn append_unchecked(&mut self, tx: SubTx) -> bool {
        let c = self.chains.entry(tx.sender).or_default();
        if tx.seq != c.len() as u64 + 1 {
            return false;
        }
        self.by_hash.insert(tx.hash(), (tx.sender, tx.seq));
        c.push(tx);
        true
    }

    pub fn accounts(&self) -> impl Iterator<Item = &AccountId> {
        self.chains.keys()
    }

    /// Wire bytes of the subchains whose account ids start with `label`.
    pub fn bytes_under(&self, label: &str) -> u64 {
        self.chains.iter().filter(|(a, _)| a.has_prefix(label)).map(|(_, c)| (c.len() * TX_LEN) as u64).sum()
    }

    pub fn total_txs(&self) -> u64 {
        self.chains.values().map(|c| c.len() as u64).sum()
    }
}
